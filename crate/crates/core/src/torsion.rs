//! Torsion and torsion-free classes: quotient/sub closures, the joint
//! closure operators, exhaustive enumeration and the perpendicular maps.

use std::collections::BTreeSet;

use crate::filt::Subcat;
use crate::model::CategoryPresentation;

/// Precompiled support masks of the stable conflations, the only data the
/// closure fixpoints consume.
#[derive(Debug, Clone, Copy)]
struct StableRule {
    a: u32,
    b: u32,
    c: u32,
}

fn stable_rules(p: &CategoryPresentation) -> Vec<StableRule> {
    p.conflations()
        .iter()
        .filter(|cf| cf.stable)
        .map(|cf| StableRule {
            a: cf.a.support(),
            b: cf.b.support(),
            c: cf.c.support(),
        })
        .collect()
}

fn fac_step(rules: &[StableRule], s: u32) -> u32 {
    let mut out = s;
    for r in rules {
        if r.b & !out == 0 {
            out |= r.c;
        }
    }
    out
}

fn sub_step(rules: &[StableRule], s: u32) -> u32 {
    let mut out = s;
    for r in rules {
        if r.b & !out == 0 {
            out |= r.a;
        }
    }
    out
}

fn ext_step(rules: &[StableRule], s: u32) -> u32 {
    let mut out = s;
    for r in rules {
        if (r.a | r.c) & !out == 0 {
            out |= r.b;
        }
    }
    out
}

fn fixpoint(mut s: u32, mut step: impl FnMut(u32) -> u32) -> u32 {
    loop {
        let next = step(s);
        if next == s {
            return s;
        }
        s = next;
    }
}

/// Closure of `s` under quotients: third terms of stable conflations whose
/// middle is supported in the set, iterated to a fixpoint.
pub fn fac_theta(p: &CategoryPresentation, s: Subcat) -> Subcat {
    let rules = stable_rules(p);
    Subcat(fixpoint(s.0, |m| fac_step(&rules, m)))
}

/// Closure of `s` under subobjects: first terms of stable conflations whose
/// middle is supported in the set, iterated to a fixpoint.
pub fn sub_theta(p: &CategoryPresentation, s: Subcat) -> Subcat {
    let rules = stable_rules(p);
    Subcat(fixpoint(s.0, |m| sub_step(&rules, m)))
}

/// Torsion closure: least superset of `s` closed under both quotients and
/// stable extensions. Coincides with the extension closure of the quotient
/// closure on every bundled corpus; the joint fixpoint is the definition.
pub fn t_closure(p: &CategoryPresentation, s: Subcat) -> Subcat {
    let rules = stable_rules(p);
    Subcat(fixpoint(s.0, |m| ext_step(&rules, fac_step(&rules, m))))
}

/// Torsion-free closure: least superset of `s` closed under subobjects and
/// stable extensions.
pub fn f_closure(p: &CategoryPresentation, s: Subcat) -> Subcat {
    let rules = stable_rules(p);
    Subcat(fixpoint(s.0, |m| ext_step(&rules, sub_step(&rules, m))))
}

pub fn is_torsion_class(p: &CategoryPresentation, s: Subcat) -> bool {
    t_closure(p, s) == s
}

pub fn is_torsionfree_class(p: &CategoryPresentation, s: Subcat) -> bool {
    f_closure(p, s) == s
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("{n} indecomposables exceed the enumeration bound {bound}; raise the bound to proceed")]
pub struct BoundExceeded {
    pub n: usize,
    pub bound: usize,
}

fn enumerate_closures(
    p: &CategoryPresentation,
    bound: usize,
    jobs: usize,
    close: fn(&CategoryPresentation, Subcat) -> Subcat,
) -> Result<Vec<Subcat>, BoundExceeded> {
    let n = p.num_indecs();
    if n > bound {
        return Err(BoundExceeded { n, bound });
    }
    let total: u64 = 1u64 << n;
    let jobs = jobs.max(1).min(total as usize);

    let collect_range = |lo: u64, hi: u64| -> BTreeSet<u32> {
        let mut seen = BTreeSet::new();
        for mask in lo..hi {
            seen.insert(close(p, Subcat(mask as u32)).0);
        }
        seen
    };

    let mut seen: BTreeSet<u32> = BTreeSet::new();
    if jobs == 1 {
        seen = collect_range(0, total);
    } else {
        let chunk = total / jobs as u64 + 1;
        let parts = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..jobs {
                let lo = (w as u64 * chunk).min(total);
                let hi = ((w as u64 + 1) * chunk).min(total);
                handles.push(scope.spawn(move || collect_range(lo, hi)));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("enumeration worker panicked"))
                .collect::<Vec<_>>()
        });
        for part in parts {
            seen.extend(part);
        }
    }

    let mut out: Vec<Subcat> = seen.into_iter().map(Subcat).collect();
    out.sort_by(|a, b| a.canonical_cmp(*b));
    Ok(out)
}

/// All torsion classes of the presentation: closures of every subset of the
/// indecomposables, deduplicated and sorted canonically by (size, members).
pub fn enumerate_tors(
    p: &CategoryPresentation,
    bound: usize,
    jobs: usize,
) -> Result<Vec<Subcat>, BoundExceeded> {
    enumerate_closures(p, bound, jobs, t_closure)
}

/// All torsion-free classes, enumerated the same way.
pub fn enumerate_torf(
    p: &CategoryPresentation,
    bound: usize,
    jobs: usize,
) -> Result<Vec<Subcat>, BoundExceeded> {
    enumerate_closures(p, bound, jobs, f_closure)
}

/// Right Hom-perpendicular: indecomposables receiving no nonzero map from `s`.
pub fn perp_right(p: &CategoryPresentation, s: Subcat) -> Subcat {
    let mut out = Subcat::EMPTY;
    for m in 0..p.num_indecs() {
        if s.iter().all(|x| p.hom_dim_indec(x, m) == 0) {
            out.insert(m);
        }
    }
    out
}

/// Left Hom-perpendicular: indecomposables with no nonzero map into `s`.
pub fn perp_left(p: &CategoryPresentation, s: Subcat) -> Subcat {
    let mut out = Subcat::EMPTY;
    for m in 0..p.num_indecs() {
        if s.iter().all(|x| p.hom_dim_indec(m, x) == 0) {
            out.insert(m);
        }
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("torsion pair round trip failed for T = {tors}: perp_right = {free}, perp_left(perp_right) = {back}")]
pub struct PairRoundTripError {
    pub tors: String,
    pub free: String,
    pub back: String,
}

/// The torsion pair generated by a torsion class: (T, T^⊥). The double
/// perpendicular must recover T; a presentation whose Hom table disagrees
/// with its conflation structure fails here.
pub fn torsion_pair_of(
    p: &CategoryPresentation,
    t: Subcat,
) -> Result<(Subcat, Subcat), PairRoundTripError> {
    let free = perp_right(p, t);
    let back = perp_left(p, free);
    if back != t {
        return Err(PairRoundTripError {
            tors: t.key(p),
            free: free.key(p),
            back: back.key(p),
        });
    }
    Ok((t, free))
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
    fn fac_and_sub_follow_the_conflation() {
        let p = tiny();
        let e = Subcat::from_indices(&[2]);
        assert_eq!(fac_theta(&p, e), Subcat::from_indices(&[1, 2]));
        assert_eq!(sub_theta(&p, e), Subcat::from_indices(&[0, 2]));
        assert_eq!(fac_theta(&p, Subcat::EMPTY), Subcat::EMPTY);
        let x = Subcat::from_indices(&[0]);
        assert_eq!(fac_theta(&p, x), x);
    }

    #[test]
    fn closures_are_closure_operators_and_closed_sets_are_classes() {
        let p = tiny();
        type Close = fn(&CategoryPresentation, Subcat) -> Subcat;
        type Check = fn(&CategoryPresentation, Subcat) -> bool;
        let sides: [(Close, Check); 2] = [
            (t_closure, is_torsion_class),
            (f_closure, is_torsionfree_class),
        ];
        for mask in 0..8u32 {
            let s = Subcat(mask);
            for (close, check) in sides {
                let c = close(&p, s);
                assert!(s.is_subset_of(c));
                assert_eq!(close(&p, c), c);
                assert!(check(&p, c));
                for sup in 0..8u32 {
                    if Subcat(sup).is_subset_of(s) {
                        assert!(close(&p, Subcat(sup)).is_subset_of(c));
                    }
                }
            }
        }
    }

    #[test]
    fn torsion_closure_is_extension_closure_of_quotient_closure() {
        let p = tiny();
        let rules = stable_rules(&p);
        for mask in 0..8u32 {
            let joint = t_closure(&p, Subcat(mask));
            let fac_first = fixpoint(fac_theta(&p, Subcat(mask)).0, |m| ext_step(&rules, m));
            assert_eq!(joint.0, fac_first);
        }
    }

    #[test]
    fn tiny_torsion_classes_by_hand() {
        // Rules: E in S forces Y (quotient); {X, Y} in S forces E (extension).
        let p = tiny();
        let tors = enumerate_tors(&p, 22, 1).unwrap();
        let expect: Vec<Subcat> = [
            Subcat::EMPTY,
            Subcat::from_indices(&[0]),
            Subcat::from_indices(&[1]),
            Subcat::from_indices(&[1, 2]),
            Subcat::full(&p),
        ]
        .into();
        assert_eq!(tors, expect);
        let torf = enumerate_torf(&p, 22, 1).unwrap();
        assert_eq!(torf.len(), 5);
        assert!(torf.contains(&Subcat::from_indices(&[0, 2])));
    }

    #[test]
    fn enumeration_respects_bound_and_jobs() {
        let p = tiny();
        assert_eq!(
            enumerate_tors(&p, 2, 1),
            Err(BoundExceeded { n: 3, bound: 2 })
        );
        let one = enumerate_tors(&p, 22, 1).unwrap();
        for jobs in [2, 3, 8] {
            assert_eq!(enumerate_tors(&p, 22, jobs).unwrap(), one);
        }
    }

    #[test]
    fn perps_and_pairs() {
        let p = tiny();
        let x = Subcat::from_indices(&[0]);
        // X maps into E only.
        assert_eq!(perp_right(&p, x), Subcat::from_indices(&[1]));
        assert_eq!(perp_left(&p, Subcat::from_indices(&[1])), x);
        let (t, f) = torsion_pair_of(&p, x).unwrap();
        assert_eq!((t, f), (x, Subcat::from_indices(&[1])));
        let (_, f_all) = torsion_pair_of(&p, Subcat::full(&p)).unwrap();
        assert_eq!(f_all, Subcat::EMPTY);
    }

    #[test]
    fn closing_a_pair_of_ends_contains_their_summands() {
        let p = tiny();
        for i in 0..3 {
            for j in 0..3 {
                let pair = Subcat::from_indices(&[i, j]);
                assert!(pair.is_subset_of(t_closure(&p, pair)));
            }
        }
    }
}
