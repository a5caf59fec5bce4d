//! Filtration closures, filtration lengths, semibricks and strata.

use std::collections::{HashMap, VecDeque};

use crate::model::{CategoryPresentation, ObjClass};

/// Additive, summand-closed subcategory, represented by the bitmask of the
/// indecomposables it contains. Canonical order is declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subcat(pub u32);

impl Subcat {
    pub const EMPTY: Subcat = Subcat(0);

    pub fn full(p: &CategoryPresentation) -> Subcat {
        if p.num_indecs() == 32 {
            Subcat(u32::MAX)
        } else {
            Subcat((1u32 << p.num_indecs()) - 1)
        }
    }

    pub fn from_indices(indices: &[usize]) -> Subcat {
        Subcat(indices.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    pub fn contains(self, idx: usize) -> bool {
        self.0 & (1 << idx) != 0
    }

    pub fn insert(&mut self, idx: usize) {
        self.0 |= 1 << idx;
    }

    pub fn union(self, other: Subcat) -> Subcat {
        Subcat(self.0 | other.0)
    }

    pub fn inter(self, other: Subcat) -> Subcat {
        Subcat(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Subcat) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// Whether an object class is supported inside this subcategory.
    pub fn supports(self, m: &ObjClass) -> bool {
        m.support() & !self.0 == 0
    }

    /// Canonical printed form: member ids in declaration order, braced.
    pub fn key(self, p: &CategoryPresentation) -> String {
        let ids: Vec<&str> = self.iter().map(|i| p.id_of(i)).collect();
        format!("{{{}}}", ids.join(","))
    }

    /// Compares by (size, member indices lexicographically); the canonical
    /// order for listing subcategories.
    pub fn canonical_cmp(self, other: Subcat) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

/// Least subcategory containing `x` and closed under extensions along the
/// listed conflations (all of them, or only the stable ones).
///
/// Implicit split conflations never enlarge a support-closed set, so only the
/// listed ones are iterated.
pub fn filt_closure(p: &CategoryPresentation, x: Subcat, stable_only: bool) -> Subcat {
    let mut s = x;
    loop {
        let before = s;
        for cf in p.conflations() {
            if stable_only && !cf.stable {
                continue;
            }
            if s.supports(&cf.a) && s.supports(&cf.c) {
                s = s.union(Subcat(cf.b.support()));
            }
        }
        if s == before {
            return s;
        }
    }
}

/// Result of a filtration-length search. `length` is `None` when `m` admits
/// no filtration with subquotients among the members of `x`; `cap_hit`
/// records that the search refused to grow some multiplicity past the cap,
/// in which case an absent length is only "not found within the cap".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiltLength {
    pub length: Option<u32>,
    pub cap_hit: bool,
}

/// Minimal number of filtration steps building `m` from single members of
/// `x`, each step an inflation whose cone is one member with multiplicity 1.
///
/// Breadth-first search downward from `m`: a step strips one member x_i off
/// the bottom, either through a listed conflation (x_i, b, c) with b embedded
/// in the current state (the state moves to state - b + c), or through the
/// implicit split (x_i, x_i ⊕ rest, rest). Zero is reached in exactly
/// `filt_length` steps when `m` lies in the filtration closure.
pub fn filt_length(
    p: &CategoryPresentation,
    x: Subcat,
    m: &ObjClass,
    stable_only: bool,
    mult_cap: u32,
) -> FiltLength {
    if m.is_zero() {
        return FiltLength { length: Some(0), cap_hit: false };
    }
    let mut cap_hit = m.max_mult() > mult_cap;
    if cap_hit {
        return FiltLength { length: None, cap_hit };
    }

    let steps: Vec<_> = p
        .conflations()
        .iter()
        .filter(|cf| {
            if stable_only && !cf.stable {
                return false;
            }
            // First term must be a single member of x with multiplicity 1.
            cf.a.total_mult() == 1 && x.supports(&cf.a)
        })
        .collect();

    let mut dist: HashMap<ObjClass, u32> = HashMap::new();
    let mut queue: VecDeque<ObjClass> = VecDeque::new();
    dist.insert(m.clone(), 0);
    queue.push_back(m.clone());

    while let Some(state) = queue.pop_front() {
        let d = dist[&state];
        let mut push = |next: ObjClass, cap_hit: &mut bool| -> bool {
            if next.max_mult() > mult_cap {
                *cap_hit = true;
                return false;
            }
            if next.is_zero() {
                return true;
            }
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
            false
        };

        // Split strips: remove one copy of any x-member present in the state.
        for i in x.iter() {
            if state.mult_of(i) > 0 {
                let next = state.minus(&ObjClass::single(i));
                if push(next, &mut cap_hit) {
                    return FiltLength { length: Some(d + 1), cap_hit };
                }
            }
        }
        // Listed conflations, padded by direct summands: b may sit inside a
        // larger state, the remainder is carried along.
        for cf in &steps {
            if cf.b.le(&state) {
                let next = state.minus(&cf.b).direct_sum(&cf.c);
                if push(next, &mut cap_hit) {
                    return FiltLength { length: Some(d + 1), cap_hit };
                }
            }
        }
    }

    FiltLength { length: None, cap_hit }
}

/// A set is a semibrick when every member is a brick and all Hom spaces
/// between distinct members vanish.
pub fn semibrick_check(p: &CategoryPresentation, x: Subcat) -> bool {
    for i in x.iter() {
        if !p.is_brick(i) {
            return false;
        }
        for j in x.iter() {
            if i != j && p.hom_dim_indec(i, j) != 0 {
                return false;
            }
        }
    }
    true
}

/// A simple-minded system is a semibrick whose filtration closure (under all
/// conflations, not only stable ones) is the whole category.
pub fn sms_check(p: &CategoryPresentation, x: Subcat) -> bool {
    semibrick_check(p, x) && filt_closure(p, x, false) == Subcat::full(p)
}

/// The stratification of the indecomposables by length level.
///
/// `theta1` collects the indecomposables of minimal theta (level 1 after
/// normalisation; raw values are never mutated, levels are
/// `theta - min_theta + 1`). Level n > 1 collects the bricks at that level
/// with no Hom to or from any lower-level member. `levels` lists the
/// nonempty levels above 1 in increasing order, and `theta_inf` is the union
/// of all levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strata {
    pub theta1: Subcat,
    pub levels: Vec<(u32, Subcat)>,
    pub theta_inf: Subcat,
}

/// Returns `None` for the empty presentation (no minimal level exists).
pub fn strata(p: &CategoryPresentation) -> Option<Strata> {
    let n = p.num_indecs();
    if n == 0 {
        return None;
    }
    let min_theta = (0..n).map(|i| p.theta_of(i)).min().unwrap();
    let level = |i: usize| p.theta_of(i) - min_theta + 1;
    let max_level = (0..n).map(level).max().unwrap();

    let theta1 = Subcat::from_indices(
        &(0..n).filter(|&i| level(i) == 1).collect::<Vec<_>>(),
    );
    let mut accumulated = theta1;
    let mut levels = Vec::new();
    for lv in 2..=max_level {
        let mut stratum = Subcat::EMPTY;
        for i in 0..n {
            if level(i) != lv || !p.is_brick(i) {
                continue;
            }
            let orthogonal = accumulated
                .iter()
                .all(|j| p.hom_dim_indec(i, j) == 0 && p.hom_dim_indec(j, i) == 0);
            if orthogonal {
                stratum.insert(i);
            }
        }
        if !stratum.is_empty() {
            levels.push((lv, stratum));
            accumulated = accumulated.union(stratum);
        }
    }
    Some(Strata { theta1, levels, theta_inf: accumulated })
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("{scope} is not closed under stable extensions: conflation with ends {ends} has middle outside")]
pub struct NotExtensionClosed {
    pub scope: String,
    pub ends: String,
}

/// Members of `c` admitting no nonsplit stable conflation inside `c` with
/// both ends nonzero. Only indecomposables qualify; a decomposable object
/// splits. Errors when `c` is not closed under stable extensions.
pub fn simples(p: &CategoryPresentation, c: Subcat) -> Result<Subcat, NotExtensionClosed> {
    for cf in p.conflations() {
        if cf.stable && c.supports(&cf.a) && c.supports(&cf.c) && !c.supports(&cf.b) {
            return Err(NotExtensionClosed {
                scope: c.key(p),
                ends: format!("({}, {})", Subcat(cf.a.support()).key(p), Subcat(cf.c.support()).key(p)),
            });
        }
    }
    let mut out = Subcat::EMPTY;
    for i in c.iter() {
        let target = ObjClass::single(i);
        let decomposable = p.conflations().iter().any(|cf| {
            cf.stable
                && cf.b == target
                && !cf.a.is_zero()
                && !cf.c.is_zero()
                && c.supports(&cf.a)
                && c.supports(&cf.c)
        });
        if !decomposable {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Round trip semibrick -> filtration closure -> simples.
///
/// The closure is taken under all conflations; lengths are recomputed as
/// filtration lengths over `x`, stability of each conflation inside the
/// closure is re-decided against those lengths, and the simples of the
/// closure with respect to the recomputed stability must come back to `x`.
pub fn length_wide_roundtrip(p: &CategoryPresentation, x: Subcat, mult_cap: u32) -> bool {
    debug_assert!(semibrick_check(p, x));
    let closure = filt_closure(p, x, false);
    let lx = |m: &ObjClass| filt_length(p, x, m, false, mult_cap).length;

    let mut simple = Subcat::EMPTY;
    'members: for i in closure.iter() {
        let target = ObjClass::single(i);
        for cf in p.conflations() {
            if cf.b != target || cf.a.is_zero() || cf.c.is_zero() {
                continue;
            }
            if !(closure.supports(&cf.a) && closure.supports(&cf.c)) {
                continue;
            }
            let (la, lb, lc) = (lx(&cf.a), lx(&target), lx(&cf.c));
            let restabilised = match (la, lb, lc) {
                (Some(la), Some(lb), Some(lc)) => lb == la + lc,
                _ => false,
            };
            if restabilised {
                continue 'members;
            }
        }
        simple.insert(i);
    }
    simple == x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> CategoryPresentation {
        CategoryPresentation::load(
            r#"
            name = "tiny"
            indecs = [ { id = "X", theta = 1 }, { id = "Y", theta = 1 }, { id = "E", theta = 2 } ]
            hom = [ { from = "E", to = "Y", dim = 1 }, { from = "X", to = "E", dim = 1 } ]
            ext = [ { from = "Y", to = "X" } ]
            conflations = [ { a = ["X"], b = ["E"], c = ["Y"], stable = true, split = false } ]
            "#,
        )
        .unwrap()
    }

    #[test]
    fn subcat_basics() {
        let p = tiny();
        let s = Subcat::from_indices(&[0, 2]);
        assert!(s.contains(0) && !s.contains(1));
        assert_eq!(s.len(), 2);
        assert_eq!(s.key(&p), "{X,E}");
        assert_eq!(Subcat::EMPTY.key(&p), "{}");
        assert!(Subcat::from_indices(&[0]).is_subset_of(s));
        assert_eq!(Subcat::full(&p), Subcat(0b111));
    }

    #[test]
    fn canonical_order_is_size_then_lexicographic() {
        let a = Subcat::from_indices(&[0, 3]);
        let b = Subcat::from_indices(&[1, 2]);
        // As raw masks a > b, but [0,3] precedes [1,2] lexicographically.
        assert_eq!(a.canonical_cmp(b), std::cmp::Ordering::Less);
        assert_eq!(
            Subcat::from_indices(&[1]).canonical_cmp(a),
            std::cmp::Ordering::Less
        );
    }

    #[test]
    fn closure_adds_middles() {
        let p = tiny();
        let ends = Subcat::from_indices(&[0, 1]);
        assert_eq!(filt_closure(&p, ends, false), Subcat::full(&p));
        assert_eq!(filt_closure(&p, ends, true), Subcat::full(&p));
        let x_only = Subcat::from_indices(&[0]);
        assert_eq!(filt_closure(&p, x_only, false), x_only);
    }

    #[test]
    fn closure_is_a_closure_operator() {
        let p = tiny();
        for mask in 0..8u32 {
            let s = Subcat(mask);
            let c = filt_closure(&p, s, false);
            assert!(s.is_subset_of(c));
            assert_eq!(filt_closure(&p, c, false), c, "idempotent");
            for sup in 0..8u32 {
                if Subcat(sup).is_subset_of(s) {
                    assert!(filt_closure(&p, Subcat(sup), false).is_subset_of(c), "monotone");
                }
            }
        }
    }

    #[test]
    fn filt_length_counts_single_member_steps() {
        let p = tiny();
        let xy = Subcat::from_indices(&[0, 1]);
        assert_eq!(filt_length(&p, xy, &ObjClass::zero(), false, 3).length, Some(0));
        assert_eq!(filt_length(&p, xy, &ObjClass::single(0), false, 3).length, Some(1));
        assert_eq!(filt_length(&p, xy, &ObjClass::single(2), false, 3).length, Some(2));
        let e_plus_x = ObjClass::from_mults(&[(2, 1), (0, 1)]);
        assert_eq!(filt_length(&p, xy, &e_plus_x, false, 3).length, Some(3));
        // E is not built from X alone.
        let r = filt_length(&p, Subcat::from_indices(&[0]), &ObjClass::single(2), false, 3);
        assert_eq!(r.length, None);
        assert!(!r.cap_hit);
    }

    #[test]
    fn filt_length_reports_cap() {
        let p = tiny();
        let m = ObjClass::from_mults(&[(0, 5)]);
        let r = filt_length(&p, Subcat::from_indices(&[0]), &m, false, 3);
        assert_eq!(r.length, None);
        assert!(r.cap_hit);
        let ok = filt_length(&p, Subcat::from_indices(&[0]), &m, false, 5);
        assert_eq!(ok.length, Some(5));
    }

    #[test]
    fn semibrick_and_sms() {
        let p = tiny();
        let xy = Subcat::from_indices(&[0, 1]);
        assert!(semibrick_check(&p, xy));
        assert!(sms_check(&p, xy));
        // X -> E is a nonzero map, so {X, E} is not a semibrick.
        assert!(!semibrick_check(&p, Subcat::from_indices(&[0, 2])));
        assert!(!sms_check(&p, Subcat::from_indices(&[0])));
        assert!(semibrick_check(&p, Subcat::EMPTY));
    }

    #[test]
    fn strata_of_tiny() {
        let p = tiny();
        let s = strata(&p).unwrap();
        assert_eq!(s.theta1, Subcat::from_indices(&[0, 1]));
        // E has Hom to Y and from X, so no level-2 stratum.
        assert!(s.levels.is_empty());
        assert_eq!(s.theta_inf, s.theta1);
    }

    #[test]
    fn strata_levels_are_shifted_when_min_theta_is_not_one() {
        let p = CategoryPresentation::load(
            r#"
            name = "shifted"
            indecs = [ { id = "A", theta = 2 }, { id = "B", theta = 4 } ]
            "#,
        )
        .unwrap();
        let s = strata(&p).unwrap();
        assert_eq!(s.theta1, Subcat::from_indices(&[0]));
        assert_eq!(s.levels, vec![(3, Subcat::from_indices(&[1]))]);
        assert_eq!(s.theta_inf, Subcat::full(&p));
    }

    #[test]
    fn strata_empty_presentation() {
        let p = CategoryPresentation::load("name = \"zero\"").unwrap();
        assert!(strata(&p).is_none());
    }

    #[test]
    fn simples_excludes_middles() {
        let p = tiny();
        assert_eq!(simples(&p, Subcat::full(&p)), Ok(Subcat::from_indices(&[0, 1])));
        assert_eq!(simples(&p, Subcat::from_indices(&[0])), Ok(Subcat::from_indices(&[0])));
        // {X, Y} is not extension closed: the middle E is missing.
        assert!(simples(&p, Subcat::from_indices(&[0, 1])).is_err());
        // Restricting to {E} alone: ends leave the scope, E counts as simple.
        assert_eq!(simples(&p, Subcat::from_indices(&[2])), Ok(Subcat::from_indices(&[2])));
    }

    #[test]
    fn roundtrip_on_tiny_semibricks() {
        let p = tiny();
        assert!(length_wide_roundtrip(&p, Subcat::from_indices(&[0, 1]), 3));
        assert!(length_wide_roundtrip(&p, Subcat::from_indices(&[0]), 3));
        assert!(length_wide_roundtrip(&p, Subcat::from_indices(&[2]), 3));
        assert!(length_wide_roundtrip(&p, Subcat::EMPTY, 3));
    }
}
