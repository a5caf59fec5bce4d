//! The lattice of torsion classes: covers, joins and meets, brick labels,
//! irreducible elements, and the structural laws that tie them together.

use std::collections::{BTreeSet, HashMap};

use crate::filt::{filt_closure, filt_length, strata, Subcat};
use crate::model::{CategoryPresentation, ObjClass};
use crate::report::Report;
use crate::torsion::{
    enumerate_torf, enumerate_tors, f_closure, fac_theta, is_torsion_class, perp_left,
    perp_right, sub_theta, t_closure,
};

fn one(i: usize) -> Subcat {
    Subcat::from_indices(&[i])
}

/// Hasse arrows of a family of distinct subcategories ordered by containment:
/// (upper, lower) index pairs with nothing strictly between. Plain O(n²·n)
/// containment scanning; the families at hand are small.
fn covers_of(elements: &[Subcat]) -> Vec<(usize, usize)> {
    let mut covers = Vec::new();
    for (i, &upper) in elements.iter().enumerate() {
        for (j, &lower) in elements.iter().enumerate() {
            if i == j || !lower.is_subset_of(upper) {
                continue;
            }
            let between = elements.iter().enumerate().any(|(k, &mid)| {
                k != i && k != j && lower.is_subset_of(mid) && mid.is_subset_of(upper)
            });
            if !between {
                covers.push((i, j));
            }
        }
    }
    covers.sort_unstable();
    covers
}

/// The complete lattice of torsion classes. `elements` is canonically sorted;
/// `covers` holds (upper, lower) pairs in index order. Join is the torsion
/// closure of the union, meet is the intersection.
#[derive(Debug, Clone)]
pub struct TorsLattice {
    pub elements: Vec<Subcat>,
    pub covers: Vec<(usize, usize)>,
    pub bottom: usize,
    pub top: usize,
    index: HashMap<u32, usize>,
}

impl TorsLattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, s: Subcat) -> Option<usize> {
        self.index.get(&s.0).copied()
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.elements[i].is_subset_of(self.elements[j])
    }

    pub fn lower_covers(&self, i: usize) -> Vec<usize> {
        self.covers.iter().filter(|&&(u, _)| u == i).map(|&(_, l)| l).collect()
    }

    pub fn upper_covers(&self, i: usize) -> Vec<usize> {
        self.covers.iter().filter(|&&(_, l)| l == i).map(|&(u, _)| u).collect()
    }
}

/// Builds the lattice from the enumerated torsion classes. The element list
/// must be complete (the output of the enumeration): bottom and top are
/// looked up, not inserted.
pub fn build_lattice(p: &CategoryPresentation, mut elements: Vec<Subcat>) -> TorsLattice {
    elements.sort_by(|a, b| a.canonical_cmp(*b));
    elements.dedup();
    let index: HashMap<u32, usize> =
        elements.iter().enumerate().map(|(i, s)| (s.0, i)).collect();
    let covers = covers_of(&elements);
    let bottom = index[&t_closure(p, Subcat::EMPTY).0];
    let top = index[&Subcat::full(p).0];
    TorsLattice { elements, covers, bottom, top, index }
}

/// Join by the closure formula; `None` when the result is missing from the
/// lattice, which falsifies the enumeration.
pub fn join(p: &CategoryPresentation, l: &TorsLattice, i: usize, j: usize) -> Option<usize> {
    l.index_of(t_closure(p, l.elements[i].union(l.elements[j])))
}

/// Meet by intersection; `None` under the same proviso as [`join`].
pub fn meet(l: &TorsLattice, i: usize, j: usize) -> Option<usize> {
    l.index_of(l.elements[i].inter(l.elements[j]))
}

/// The closure formulas for join and meet must agree with the least upper
/// and greatest lower bounds found by scanning the element list.
pub fn check_lattice_laws(p: &CategoryPresentation, l: &TorsLattice) -> Report {
    let mut rep = Report::new("lattice-laws");
    let m = l.len();
    for i in 0..m {
        if !l.le(l.bottom, i) || !l.le(i, l.top) {
            rep.fail(format!("{} is not between bottom and top", l.elements[i].key(p)));
        }
    }
    for i in 0..m {
        for j in i..m {
            let pair = || format!("({}, {})", l.elements[i].key(p), l.elements[j].key(p));
            let ubs: Vec<usize> = (0..m).filter(|&k| l.le(i, k) && l.le(j, k)).collect();
            let least: Vec<usize> = ubs
                .iter()
                .copied()
                .filter(|&k| ubs.iter().all(|&k2| k2 == k || !l.le(k2, k)))
                .collect();
            match (join(p, l, i, j), least.as_slice()) {
                (Some(jo), [lub]) if jo == *lub => {}
                (Some(jo), _) => rep.fail(format!(
                    "join {} = {} is not the unique least upper bound",
                    pair(),
                    l.elements[jo].key(p)
                )),
                (None, _) => rep.fail(format!("join {} is not a torsion class", pair())),
            }
            let lbs: Vec<usize> = (0..m).filter(|&k| l.le(k, i) && l.le(k, j)).collect();
            let greatest: Vec<usize> = lbs
                .iter()
                .copied()
                .filter(|&k| lbs.iter().all(|&k2| k2 == k || !l.le(k, k2)))
                .collect();
            match (meet(l, i, j), greatest.as_slice()) {
                (Some(me), [glb]) if me == *glb => {}
                (Some(me), _) => rep.fail(format!(
                    "meet {} = {} is not the unique greatest lower bound",
                    pair(),
                    l.elements[me].key(p)
                )),
                (None, _) => rep.fail(format!("meet {} is not a torsion class", pair())),
            }
        }
    }
    rep.note(format!("{} elements, {} covers", m, l.covers.len()));
    rep
}

fn for_each_combo<F: FnMut(&[usize])>(m: usize, k: usize, f: &mut F) {
    fn rec<F: FnMut(&[usize])>(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut F) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, f);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::new(), f)
}

/// Semidistributivity in both directions, over subset families up to
/// `subset_bound` members (size 2 is the classical triple form; larger sizes
/// spot-check the complete form at finite scale).
pub fn check_semidistributive(
    p: &CategoryPresentation,
    l: &TorsLattice,
    subset_bound: usize,
) -> Report {
    let mut rep = Report::new("semidistributivity");
    let m = l.len();
    let mut jt = vec![vec![0usize; m]; m];
    let mut mt = vec![vec![0usize; m]; m];
    for i in 0..m {
        for j in 0..m {
            match (join(p, l, i, j), meet(l, i, j)) {
                (Some(a), Some(b)) => {
                    jt[i][j] = a;
                    mt[i][j] = b;
                }
                _ => {
                    rep.fail("join/meet tables incomplete; see lattice-laws".to_string());
                    return rep;
                }
            }
        }
    }
    let bound = subset_bound.min(m);
    for k in 2..=bound.max(1) {
        for_each_combo(m, k, &mut |fam: &[usize]| {
            let join_fam = fam[1..].iter().fold(fam[0], |acc, &e| jt[acc][e]);
            let meet_fam = fam[1..].iter().fold(fam[0], |acc, &e| mt[acc][e]);
            for x in 0..m {
                let first_meet = mt[x][fam[0]];
                if fam.iter().all(|&e| mt[x][e] == first_meet) && mt[x][join_fam] != first_meet
                {
                    rep.fail(format!(
                        "SD-meet fails at x = {}, family {:?}",
                        l.elements[x].key(p),
                        fam.iter().map(|&e| l.elements[e].key(p)).collect::<Vec<_>>()
                    ));
                }
                let first_join = jt[x][fam[0]];
                if fam.iter().all(|&e| jt[x][e] == first_join) && jt[x][meet_fam] != first_join
                {
                    rep.fail(format!(
                        "SD-join fails at x = {}, family {:?}",
                        l.elements[x].key(p),
                        fam.iter().map(|&e| l.elements[e].key(p)).collect::<Vec<_>>()
                    ));
                }
            }
        });
    }
    rep.note(format!(
        "subset families checked up to size {} (size 2 is the triple form)",
        bound
    ));
    rep
}

/// Every element decomposes as a join of singleton closures, and those
/// generators are compact: whenever a family's join contains one, a greedy
/// sweep extracts a subfamily of at most #indecs members whose join already
/// does.
pub fn check_algebraic(p: &CategoryPresentation, l: &TorsLattice) -> Report {
    let mut rep = Report::new("algebraicity");
    let n = p.num_indecs();
    let m = l.len();

    let mut gens: Vec<Subcat> = Vec::new();
    for i in 0..n {
        let c = t_closure(p, one(i));
        if l.index_of(c).is_none() {
            rep.fail(format!("singleton closure {} is not in the lattice", c.key(p)));
        }
        if !gens.contains(&c) {
            gens.push(c);
        }
    }

    for &t in &l.elements {
        let union = t.iter().fold(Subcat::EMPTY, |acc, i| acc.union(t_closure(p, one(i))));
        if t_closure(p, union) != t {
            rep.fail(format!(
                "{} is not the join of its singleton closures",
                t.key(p)
            ));
        }
    }

    let bottom = l.elements[l.bottom];
    let witness = |family: &[usize], rep: &mut Report| {
        let join_fam = family
            .iter()
            .fold(bottom, |acc, &k| t_closure(p, acc.union(l.elements[k])));
        for &g in &gens {
            if !g.is_subset_of(join_fam) {
                continue;
            }
            let mut picked = 0usize;
            let mut cur = bottom;
            for &k in family {
                if g.is_subset_of(cur) {
                    break;
                }
                let next = t_closure(p, cur.union(l.elements[k]));
                if next != cur {
                    cur = next;
                    picked += 1;
                }
            }
            if !g.is_subset_of(cur) {
                rep.fail(format!(
                    "no greedy subfamily reaches generator {}",
                    g.key(p)
                ));
            } else if picked > n {
                rep.fail(format!(
                    "compactness witness for {} needs {} picks, more than {} indecs",
                    g.key(p),
                    picked,
                    n
                ));
            }
        }
    };

    if m <= 16 {
        for mask in 1u32..(1u32 << m) {
            let family: Vec<usize> = (0..m).filter(|&k| mask & (1 << k) != 0).collect();
            witness(&family, &mut rep);
        }
        rep.note(format!("compactness checked against all 2^{} families", m));
    } else {
        for k in 1..=3usize.min(m) {
            for_each_combo(m, k, &mut |fam: &[usize]| witness(fam, &mut rep));
        }
        rep.note("compactness checked against families of up to 3 elements".to_string());
    }
    rep
}

/// Bricks lying in perp_right(u) ∩ t, the brick set of the interval [u, t].
pub fn bricks_in(p: &CategoryPresentation, u: Subcat, t: Subcat) -> Subcat {
    let scope = perp_right(p, u).inter(t);
    let mut out = Subcat::EMPTY;
    for i in scope.iter() {
        if p.is_brick(i) {
            out.insert(i);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("no brick label for {upper} -> {lower}: {detail}")]
    NoLabel { upper: String, lower: String, detail: String },
    #[error("ambiguous brick label for {upper} -> {lower}: candidates {candidates}")]
    AmbiguousLabel { upper: String, lower: String, candidates: String },
}

/// The label of a Hasse arrow upper -> lower: the unique brick of minimal
/// theta in the interval brick set that regenerates both endpoints
/// (upper = closure of lower with the brick, lower = upper ∩ perp_left) and
/// is a subobject and a quotient of every other interval brick.
pub fn brick_label(
    p: &CategoryPresentation,
    upper: Subcat,
    lower: Subcat,
) -> Result<usize, LabelError> {
    let cands = bricks_in(p, lower, upper);
    let context = |detail: String| LabelError::NoLabel {
        upper: upper.key(p),
        lower: lower.key(p),
        detail,
    };
    if cands.is_empty() {
        return Err(context("interval brick set is empty".to_string()));
    }
    let tmin = cands.iter().map(|i| p.theta_of(i)).min().unwrap();
    let passes = |s: usize| {
        let st = one(s);
        t_closure(p, lower.union(st)) == upper
            && upper.inter(perp_left(p, st)) == lower
            && cands.iter().all(|s2| {
                let s2t = one(s2);
                sub_theta(p, s2t).contains(s) && fac_theta(p, s2t).contains(s)
            })
    };
    let winners: Vec<usize> = cands
        .iter()
        .filter(|&s| p.theta_of(s) == tmin && passes(s))
        .collect();
    match winners.as_slice() {
        [s] => Ok(*s),
        [] => Err(context(format!(
            "no minimal-theta brick among {} regenerates the arrow",
            cands.key(p)
        ))),
        many => Err(LabelError::AmbiguousLabel {
            upper: upper.key(p),
            lower: lower.key(p),
            candidates: Subcat::from_indices(many).key(p),
        }),
    }
}

/// Label of a torsion-free Hasse arrow upper -> lower: the brick of minimal
/// theta in perp_left(lower) ∩ upper, unique by definition.
pub fn dual_brick_label(
    p: &CategoryPresentation,
    upper: Subcat,
    lower: Subcat,
) -> Result<usize, LabelError> {
    let scope = perp_left(p, lower).inter(upper);
    let mut cands = Subcat::EMPTY;
    for i in scope.iter() {
        if p.is_brick(i) {
            cands.insert(i);
        }
    }
    if cands.is_empty() {
        return Err(LabelError::NoLabel {
            upper: upper.key(p),
            lower: lower.key(p),
            detail: "brick set of the torsion-free interval is empty".to_string(),
        });
    }
    let tmin = cands.iter().map(|i| p.theta_of(i)).min().unwrap();
    let minimal: Vec<usize> = cands.iter().filter(|&i| p.theta_of(i) == tmin).collect();
    match minimal.as_slice() {
        [s] => Ok(*s),
        many => Err(LabelError::AmbiguousLabel {
            upper: upper.key(p),
            lower: lower.key(p),
            candidates: Subcat::from_indices(many).key(p),
        }),
    }
}

/// Labels for every cover, in cover order.
pub fn label_all_covers(
    p: &CategoryPresentation,
    l: &TorsLattice,
) -> Result<Vec<usize>, LabelError> {
    l.covers
        .iter()
        .map(|&(u, lo)| brick_label(p, l.elements[u], l.elements[lo]))
        .collect()
}

/// Structure of one interval [u, t]: its size determines the brick set's
/// emptiness, a singleton brick set forces size 2, the brick set generates
/// perp_right(u) ∩ t by stable filtration, every minimal-theta brick yields a
/// torsion class t ∩ perp_left, and a size-2 interval carries a unique label.
pub fn interval_check(
    p: &CategoryPresentation,
    l: &TorsLattice,
    lower_idx: usize,
    upper_idx: usize,
) -> Report {
    let mut rep = Report::new("interval-structure");
    let u = l.elements[lower_idx];
    let t = l.elements[upper_idx];
    if !u.is_subset_of(t) {
        rep.fail(format!("{} is not below {}", u.key(p), t.key(p)));
        return rep;
    }
    let name = format!("[{}, {}]", u.key(p), t.key(p));
    let size = (0..l.len()).filter(|&k| l.le(lower_idx, k) && l.le(k, upper_idx)).count();
    let bricks = bricks_in(p, u, t);

    if (size == 1) != bricks.is_empty() {
        rep.fail(format!(
            "{name}: size {size} but interval brick set {}",
            bricks.key(p)
        ));
    }
    if bricks.len() == 1 && size != 2 {
        rep.fail(format!(
            "{name}: a single interval brick must give size 2, found {size}"
        ));
    }

    let scope = perp_right(p, u).inter(t);
    if filt_closure(p, bricks, true) != scope {
        rep.fail(format!(
            "{name}: stable filtrations of the brick set {} do not fill perp_right(u) ∩ t = {}",
            bricks.key(p),
            scope.key(p)
        ));
    }

    if !bricks.is_empty() {
        let tmin = bricks.iter().map(|i| p.theta_of(i)).min().unwrap();
        for s in bricks.iter().filter(|&i| p.theta_of(i) == tmin) {
            if !is_torsion_class(p, t.inter(perp_left(p, one(s)))) {
                rep.fail(format!(
                    "{name}: t ∩ perp_left({}) is not a torsion class",
                    p.id_of(s)
                ));
            }
        }
    }

    if size == 2 {
        if let Err(e) = brick_label(p, t, u) {
            rep.fail(format!("{name}: {e}"));
        }
    }
    rep
}

/// Completely join- and meet-irreducible elements by the finite-lattice
/// criterion: exactly one lower (resp. upper) cover.
pub fn irr_elements(l: &TorsLattice) -> (Vec<usize>, Vec<usize>) {
    let j_irr = (0..l.len()).filter(|&i| l.lower_covers(i).len() == 1).collect();
    let m_irr = (0..l.len()).filter(|&i| l.upper_covers(i).len() == 1).collect();
    (j_irr, m_irr)
}

/// The interval bricks whose induced candidate classes are torsion classes:
/// the join-side set tests t_closure(u ∪ S) ∩ perp_left(S), the meet-side
/// set tests t ∩ perp_left(S).
pub fn jbrick_mbrick(
    p: &CategoryPresentation,
    u: Subcat,
    t: Subcat,
) -> (Subcat, Subcat) {
    let bricks = bricks_in(p, u, t);
    let mut jb = Subcat::EMPTY;
    let mut mb = Subcat::EMPTY;
    for s in bricks.iter() {
        let st = one(s);
        let pl = perp_left(p, st);
        if is_torsion_class(p, t_closure(p, u.union(st)).inter(pl)) {
            jb.insert(s);
        }
        if is_torsion_class(p, t.inter(pl)) {
            mb.insert(s);
        }
    }
    (jb, mb)
}

/// A presentation is standard when no brick is a proper subobject and
/// quotient of itself through another object: sub ∩ fac of each brick is the
/// brick alone.
pub fn standard_check(p: &CategoryPresentation) -> Report {
    let mut rep = Report::new("standardness");
    let mut bricks = 0;
    for s in 0..p.num_indecs() {
        if !p.is_brick(s) {
            continue;
        }
        bricks += 1;
        let st = one(s);
        let overlap = sub_theta(p, st).inter(fac_theta(p, st));
        if overlap != st {
            rep.fail(format!(
                "brick {}: sub ∩ fac = {}, expected {}",
                p.id_of(s),
                overlap.key(p),
                st.key(p)
            ));
        }
    }
    rep.note(format!("{bricks} bricks checked"));
    rep
}

/// The two irreducibility bijections on an interval: the join-side brick set
/// maps onto the completely join-irreducible elements via S ↦ t_closure(u ∪ S)
/// with unique lower cover t_closure(u ∪ S) ∩ perp_left(S), and the meet-side
/// set onto the completely meet-irreducibles via S ↦ t ∩ perp_left(S) with
/// unique upper cover regenerated by S. A size-2 interval is the singleton
/// brick case, and the meet-side set always sits inside the join-side set.
pub fn irr_bijection_check(
    p: &CategoryPresentation,
    l: &TorsLattice,
    lower_idx: usize,
    upper_idx: usize,
) -> Report {
    let mut rep = Report::new("irreducible-bijections");
    let u = l.elements[lower_idx];
    let t = l.elements[upper_idx];
    let name = format!("[{}, {}]", u.key(p), t.key(p));
    let interval: Vec<usize> =
        (0..l.len()).filter(|&k| l.le(lower_idx, k) && l.le(k, upper_idx)).collect();
    let in_interval = |k: usize| l.le(lower_idx, k) && l.le(k, upper_idx);

    let lower_covers_in = |v: usize| -> Vec<usize> {
        l.lower_covers(v).into_iter().filter(|&w| in_interval(w)).collect()
    };
    let upper_covers_in = |v: usize| -> Vec<usize> {
        l.upper_covers(v).into_iter().filter(|&w| in_interval(w)).collect()
    };

    let j_irr: BTreeSet<usize> = interval
        .iter()
        .copied()
        .filter(|&v| v != lower_idx && lower_covers_in(v).len() == 1)
        .collect();
    let m_irr: BTreeSet<usize> = interval
        .iter()
        .copied()
        .filter(|&v| v != upper_idx && upper_covers_in(v).len() == 1)
        .collect();

    let (jb, mb) = jbrick_mbrick(p, u, t);

    if !mb.is_subset_of(jb) {
        rep.fail(format!(
            "{name}: meet-side bricks {} are not contained in join-side bricks {}",
            mb.key(p),
            jb.key(p)
        ));
    }

    let mut j_image: HashMap<usize, usize> = HashMap::new();
    for s in jb.iter() {
        let st = one(s);
        let ts = t_closure(p, u.union(st));
        let Some(idx) = l.index_of(ts) else {
            rep.fail(format!("{name}: t_closure(u ∪ {}) missing", p.id_of(s)));
            continue;
        };
        if !in_interval(idx) {
            rep.fail(format!("{name}: t_closure(u ∪ {}) leaves the interval", p.id_of(s)));
            continue;
        }
        if !j_irr.contains(&idx) {
            rep.fail(format!(
                "{name}: {} is not completely join-irreducible in the interval",
                ts.key(p)
            ));
            continue;
        }
        if let Some(prev) = j_image.insert(idx, s) {
            rep.fail(format!(
                "{name}: bricks {} and {} share the join-irreducible {}",
                p.id_of(prev),
                p.id_of(s),
                ts.key(p)
            ));
        }
        let covers = lower_covers_in(idx);
        let expected = ts.inter(perp_left(p, st));
        if covers.len() != 1 || l.elements[covers[0]] != expected {
            rep.fail(format!(
                "{name}: unique lower cover of {} should be {}",
                ts.key(p),
                expected.key(p)
            ));
        }
    }
    for &v in &j_irr {
        if !j_image.contains_key(&v) {
            rep.fail(format!(
                "{name}: join-irreducible {} is not hit by any join-side brick",
                l.elements[v].key(p)
            ));
        }
    }

    let mut m_image: HashMap<usize, usize> = HashMap::new();
    for s in mb.iter() {
        let st = one(s);
        let us = t.inter(perp_left(p, st));
        let Some(idx) = l.index_of(us) else {
            rep.fail(format!("{name}: t ∩ perp_left({}) missing", p.id_of(s)));
            continue;
        };
        if !in_interval(idx) {
            rep.fail(format!("{name}: t ∩ perp_left({}) leaves the interval", p.id_of(s)));
            continue;
        }
        if !m_irr.contains(&idx) {
            rep.fail(format!(
                "{name}: {} is not completely meet-irreducible in the interval",
                us.key(p)
            ));
            continue;
        }
        if let Some(prev) = m_image.insert(idx, s) {
            rep.fail(format!(
                "{name}: bricks {} and {} share the meet-irreducible {}",
                p.id_of(prev),
                p.id_of(s),
                us.key(p)
            ));
        }
        let covers = upper_covers_in(idx);
        let expected = t_closure(p, us.union(st));
        if covers.len() != 1 || l.elements[covers[0]] != expected {
            rep.fail(format!(
                "{name}: unique upper cover of {} should be {}",
                us.key(p),
                expected.key(p)
            ));
        }
    }
    for &v in &m_irr {
        if !m_image.contains_key(&v) {
            rep.fail(format!(
                "{name}: meet-irreducible {} is not hit by any meet-side brick",
                l.elements[v].key(p)
            ));
        }
    }

    let bricks = bricks_in(p, u, t);
    if (interval.len() == 2) != (bricks.len() == 1) {
        rep.fail(format!(
            "{name}: size {} and interval brick set {} disagree on the cover case",
            interval.len(),
            bricks.key(p)
        ));
    }
    if interval.len() == 2 && bricks.len() == 1 {
        let s = bricks.iter().next().unwrap();
        let st = one(s);
        if t_closure(p, u.union(st)) != t || t.inter(perp_left(p, st)) != u {
            rep.fail(format!(
                "{name}: the unique brick {} does not regenerate both endpoints",
                p.id_of(s)
            ));
        }
        if filt_closure(p, st, true) != perp_right(p, u).inter(t) {
            rep.fail(format!(
                "{name}: stable filtrations of {} miss part of perp_right(u) ∩ t",
                p.id_of(s)
            ));
        }
    }
    rep
}

/// Presentation with every length replaced by the filtration length over the
/// deepest stratum, and stability re-decided; errors when some
/// indecomposable admits no finite filtration within the multiplicity cap.
pub fn relevel_by_theta_inf(
    p: &CategoryPresentation,
    mult_cap: u32,
) -> Result<CategoryPresentation, String> {
    let s = strata(p).ok_or("empty presentation has no strata")?;
    let mut theta = Vec::with_capacity(p.num_indecs());
    for i in 0..p.num_indecs() {
        let fl = filt_length(p, s.theta_inf, &ObjClass::single(i), false, mult_cap);
        match fl.length {
            Some(len) => theta.push(len),
            None => {
                return Err(format!(
                    "{} has no finite filtration by {}{}",
                    p.id_of(i),
                    s.theta_inf.key(p),
                    if fl.cap_hit {
                        format!(" within multiplicity cap {}", mult_cap)
                    } else {
                        String::new()
                    }
                ))
            }
        }
    }
    Ok(p.with_theta(&theta))
}

fn minimal_stratum_arrows(
    p: &CategoryPresentation,
    l: &TorsLattice,
    theta1: Subcat,
    rep: &mut Report,
) {
    for x in theta1.iter() {
        let xt = one(x);
        let px = perp_left(p, xt);
        if !is_torsion_class(p, px) {
            rep.fail(format!("perp_left({}) is not a torsion class", p.id_of(x)));
            continue;
        }
        let pidx = l.index_of(px);
        match pidx {
            Some(idx) if l.covers.contains(&(l.top, idx)) => {
                match brick_label(p, l.elements[l.top], px) {
                    Ok(s) if s == x => {}
                    Ok(s) => rep.fail(format!(
                        "top -> perp_left({}) labeled {}, expected {}",
                        p.id_of(x),
                        p.id_of(s),
                        p.id_of(x)
                    )),
                    Err(e) => rep.fail(e.to_string()),
                }
            }
            _ => rep.fail(format!(
                "top does not cover perp_left({}) = {}",
                p.id_of(x),
                px.key(p)
            )),
        }

        // The class covering the bottom is the torsion closure of x. It
        // shrinks to add(x) exactly when x has no stable self-extension; the
        // dual numbers show the closure can be strictly larger.
        let tx = t_closure(p, xt);
        if l.elements[l.bottom] != Subcat::EMPTY {
            rep.fail(format!(
                "bottom is {}, not the zero class",
                l.elements[l.bottom].key(p)
            ));
            continue;
        }
        match l.index_of(tx) {
            Some(idx) if l.covers.contains(&(idx, l.bottom)) => {
                match brick_label(p, tx, Subcat::EMPTY) {
                    Ok(s) if s == x => {}
                    Ok(s) => rep.fail(format!(
                        "t_closure({}) -> 0 labeled {}, expected {}",
                        p.id_of(x),
                        p.id_of(s),
                        p.id_of(x)
                    )),
                    Err(e) => rep.fail(e.to_string()),
                }
            }
            _ => rep.fail(format!(
                "t_closure({}) = {} does not cover the zero class",
                p.id_of(x),
                tx.key(p)
            )),
        }
    }
}

fn exhaustive_boundary_families(
    p: &CategoryPresentation,
    l: &TorsLattice,
    theta1: Subcat,
    rep: &mut Report,
) {
    let expected_top: BTreeSet<u32> =
        theta1.iter().map(|x| perp_left(p, one(x)).0).collect();
    let actual_top: BTreeSet<u32> = l
        .covers
        .iter()
        .filter(|&&(up, _)| up == l.top)
        .map(|&(_, lo)| l.elements[lo].0)
        .collect();
    if expected_top != actual_top {
        let fmt = |set: &BTreeSet<u32>| {
            set.iter().map(|&s| Subcat(s).key(p)).collect::<Vec<_>>().join(", ")
        };
        rep.fail(format!(
            "arrows out of the top are [{}], the minimal stratum predicts [{}]",
            fmt(&actual_top),
            fmt(&expected_top)
        ));
    }
    let expected_bottom: BTreeSet<u32> =
        theta1.iter().map(|x| t_closure(p, one(x)).0).collect();
    let actual_bottom: BTreeSet<u32> = l
        .covers
        .iter()
        .filter(|&&(_, lo)| lo == l.bottom)
        .map(|&(up, _)| l.elements[up].0)
        .collect();
    if expected_bottom != actual_bottom {
        let fmt = |set: &BTreeSet<u32>| {
            set.iter().map(|&s| Subcat(s).key(p)).collect::<Vec<_>>().join(", ")
        };
        rep.fail(format!(
            "arrows into the bottom are [{}], the minimal stratum predicts [{}]",
            fmt(&actual_bottom),
            fmt(&expected_bottom)
        ));
    }
}

/// Arrows at the boundary of the Hasse quiver. In any presentation, each
/// member X of the minimal stratum gives top -> perp_left(X) and
/// t_closure(X) -> 0, both labeled X. When the strata stop at level one these
/// families are exhaustive; otherwise exhaustiveness is checked on the
/// presentation relevelled by filtration length over the deepest stratum,
/// whose lattice is rebuilt here.
pub fn top_bottom_arrows_check(
    p: &CategoryPresentation,
    l: &TorsLattice,
    mult_cap: u32,
    bound: usize,
) -> Report {
    let mut rep = Report::new("boundary-arrows");
    let Some(s) = strata(p) else {
        rep.note("empty presentation, nothing to check");
        return rep;
    };
    minimal_stratum_arrows(p, l, s.theta1, &mut rep);
    if s.theta1 == s.theta_inf {
        exhaustive_boundary_families(p, l, s.theta1, &mut rep);
        return rep;
    }
    rep.note(format!(
        "strata run past level one (deepest stratum {}); exhaustiveness is checked after relevelling",
        s.theta_inf.key(p)
    ));
    let p2 = match relevel_by_theta_inf(p, mult_cap) {
        Ok(p2) => p2,
        Err(e) => {
            rep.fail(e);
            return rep;
        }
    };
    let s2 = match strata(&p2) {
        Some(s2) if s2.theta1 == s2.theta_inf => s2,
        _ => {
            rep.fail("relevelling did not flatten the strata to level one".to_string());
            return rep;
        }
    };
    match enumerate_tors(&p2, bound, 1) {
        Ok(els) => {
            let l2 = build_lattice(&p2, els);
            minimal_stratum_arrows(&p2, &l2, s2.theta1, &mut rep);
            exhaustive_boundary_families(&p2, &l2, s2.theta1, &mut rep);
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}

/// The perpendicular map is an order-reversing bijection onto the
/// torsion-free classes, turning joins into meets and covers into covers
/// with the same brick label.
pub fn dual_lattice_check(
    p: &CategoryPresentation,
    l: &TorsLattice,
    bound: usize,
    jobs: usize,
) -> Report {
    let mut rep = Report::new("tors-torf-duality");
    let torf = match enumerate_torf(p, bound, jobs) {
        Ok(v) => v,
        Err(e) => {
            rep.fail(e.to_string());
            return rep;
        }
    };
    let torf_index: HashMap<u32, usize> =
        torf.iter().enumerate().map(|(i, s)| (s.0, i)).collect();
    if torf.len() != l.len() {
        rep.fail(format!(
            "{} torsion classes but {} torsion-free classes",
            l.len(),
            torf.len()
        ));
    }

    let mut phi: Vec<usize> = Vec::with_capacity(l.len());
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for &t in &l.elements {
        let f = perp_right(p, t);
        match torf_index.get(&f.0) {
            Some(&fi) => {
                if !seen.insert(fi) {
                    rep.fail(format!("perp_right is not injective at {}", t.key(p)));
                }
                phi.push(fi);
            }
            None => {
                rep.fail(format!(
                    "perp_right({}) = {} is not a torsion-free class",
                    t.key(p),
                    f.key(p)
                ));
                return rep;
            }
        }
    }

    for i in 0..l.len() {
        for j in 0..l.len() {
            let forward = l.le(i, j);
            let reversed = torf[phi[j]].is_subset_of(torf[phi[i]]);
            if forward != reversed {
                rep.fail(format!(
                    "order reversal fails at ({}, {})",
                    l.elements[i].key(p),
                    l.elements[j].key(p)
                ));
            }
        }
    }

    for i in 0..l.len() {
        for j in i..l.len() {
            let join_set = t_closure(p, l.elements[i].union(l.elements[j]));
            if perp_right(p, join_set) != torf[phi[i]].inter(torf[phi[j]]) {
                rep.fail(format!(
                    "perp of join ({}, {}) is not the meet of perps",
                    l.elements[i].key(p),
                    l.elements[j].key(p)
                ));
            }
            let meet_set = l.elements[i].inter(l.elements[j]);
            if perp_right(p, meet_set) != f_closure(p, torf[phi[i]].union(torf[phi[j]])) {
                rep.fail(format!(
                    "perp of meet ({}, {}) is not the join of perps",
                    l.elements[i].key(p),
                    l.elements[j].key(p)
                ));
            }
        }
    }

    let torf_covers = covers_of(&torf);
    if torf_covers.len() != l.covers.len() {
        rep.fail(format!(
            "{} covers on the torsion side but {} on the torsion-free side",
            l.covers.len(),
            torf_covers.len()
        ));
    }
    for &(up, lo) in &l.covers {
        let dual = (phi[lo], phi[up]);
        if !torf_covers.contains(&dual) {
            rep.fail(format!(
                "cover {} -> {} does not dualise to a torsion-free cover",
                l.elements[up].key(p),
                l.elements[lo].key(p)
            ));
            continue;
        }
        let label = brick_label(p, l.elements[up], l.elements[lo]);
        let dual_label = dual_brick_label(p, torf[phi[lo]], torf[phi[up]]);
        match (label, dual_label) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(a), Ok(b)) => rep.fail(format!(
                "cover {} -> {} labeled {} but its dual is labeled {}",
                l.elements[up].key(p),
                l.elements[lo].key(p),
                p.id_of(a),
                p.id_of(b)
            )),
            (Err(e), _) | (_, Err(e)) => rep.fail(e.to_string()),
        }
    }
    rep.note(format!("{} torsion-free classes, {} covers", torf.len(), torf_covers.len()));
    rep
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

    fn tiny_lattice(p: &CategoryPresentation) -> TorsLattice {
        build_lattice(p, enumerate_tors(p, 22, 1).unwrap())
    }

    fn sub(p: &CategoryPresentation, ids: &[&str]) -> Subcat {
        Subcat::from_indices(
            &ids.iter().map(|id| p.index_of(id).unwrap()).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn tiny_lattice_shape() {
        let p = tiny();
        let l = tiny_lattice(&p);
        let keys: Vec<String> = l.elements.iter().map(|s| s.key(&p)).collect();
        assert_eq!(keys, ["{}", "{X}", "{Y}", "{Y,E}", "{X,Y,E}"]);
        assert_eq!(l.covers, [(1, 0), (2, 0), (3, 2), (4, 1), (4, 3)]);
        assert_eq!(l.bottom, 0);
        assert_eq!(l.top, 4);
        assert_eq!(join(&p, &l, 1, 2), Some(4));
        assert_eq!(meet(&l, 4, 3), Some(3));
        assert_eq!(meet(&l, 1, 2), Some(0));
    }

    #[test]
    fn law_reports_pass_on_tiny() {
        let p = tiny();
        let l = tiny_lattice(&p);
        let laws = check_lattice_laws(&p, &l);
        assert!(laws.ok(), "{:?}", laws.violations);
        let sd = check_semidistributive(&p, &l, 4);
        assert!(sd.ok(), "{:?}", sd.violations);
        let alg = check_algebraic(&p, &l);
        assert!(alg.ok(), "{:?}", alg.violations);
    }

    #[test]
    fn brick_labels_on_every_cover() {
        let p = tiny();
        let l = tiny_lattice(&p);
        let labels = label_all_covers(&p, &l).unwrap();
        let named: Vec<&str> = labels.iter().map(|&s| p.id_of(s)).collect();
        // Covers in order: {X}->{}, {Y}->{}, {Y,E}->{Y}, all->{X}, all->{Y,E}.
        assert_eq!(named, ["X", "Y", "E", "Y", "X"]);
    }

    #[test]
    fn labels_fail_cleanly_outside_covers() {
        let p = tiny();
        assert!(matches!(
            brick_label(&p, sub(&p, &["X"]), sub(&p, &["X"])),
            Err(LabelError::NoLabel { .. })
        ));
        // [∅, all] has three interval bricks and no unique regenerating one.
        assert!(brick_label(&p, Subcat::full(&p), Subcat::EMPTY).is_err());
    }

    #[test]
    fn irreducibles_and_brick_sets() {
        let p = tiny();
        let l = tiny_lattice(&p);
        let (j_irr, m_irr) = irr_elements(&l);
        assert_eq!(j_irr, [1, 2, 3]);
        assert_eq!(m_irr, [1, 2, 3]);
        assert_eq!(bricks_in(&p, Subcat::EMPTY, Subcat::full(&p)), Subcat::full(&p));
        assert!(bricks_in(&p, sub(&p, &["X"]), sub(&p, &["X"])).is_empty());
        let (jb, mb) = jbrick_mbrick(&p, Subcat::EMPTY, Subcat::full(&p));
        assert_eq!(jb, Subcat::full(&p));
        assert_eq!(mb, Subcat::full(&p));
    }

    #[test]
    fn interval_reports_pass_on_all_tiny_intervals() {
        let p = tiny();
        let l = tiny_lattice(&p);
        for lo in 0..l.len() {
            for up in 0..l.len() {
                if !l.le(lo, up) {
                    continue;
                }
                let rep = interval_check(&p, &l, lo, up);
                assert!(rep.ok(), "{:?}", rep.violations);
                let bij = irr_bijection_check(&p, &l, lo, up);
                assert!(bij.ok(), "{:?}", bij.violations);
            }
        }
    }

    #[test]
    fn tiny_is_standard() {
        let p = tiny();
        let rep = standard_check(&p);
        assert!(rep.ok(), "{:?}", rep.violations);
    }

    #[test]
    fn boundary_arrows_on_wide_tiny() {
        let p = tiny();
        let l = tiny_lattice(&p);
        let rep = top_bottom_arrows_check(&p, &l, 3, 22);
        assert!(rep.ok(), "{:?}", rep.violations);
        assert!(rep.notes.is_empty(), "tiny is already level one");
    }

    #[test]
    fn boundary_arrows_relevel_when_strata_are_deep() {
        // Y sits at level one, X at level two (orthogonal to Y), and Z is
        // filtered as Y then X. The raw lengths put nothing but Y in the
        // minimal stratum, yet the top has two outgoing arrows; relevelling
        // by the deepest stratum flattens the levels and the families match.
        let p = CategoryPresentation::load(
            r#"
            name = "ladder"
            indecs = [ { id = "Y", theta = 1 }, { id = "X", theta = 2 }, { id = "Z", theta = 3 } ]
            hom = [ { from = "Z", to = "X", dim = 1 }, { from = "Y", to = "Z", dim = 1 } ]
            ext = [ { from = "X", to = "Y" } ]
            conflations = [ { a = ["Y"], b = ["Z"], c = ["X"], stable = true, split = false } ]
            "#,
        )
        .unwrap();
        assert!(p.validate().is_empty());
        let s = strata(&p).unwrap();
        assert_eq!(s.theta1, sub(&p, &["Y"]));
        assert_eq!(s.theta_inf, sub(&p, &["Y", "X"]));

        let l = build_lattice(&p, enumerate_tors(&p, 22, 1).unwrap());
        assert_eq!(l.lower_covers(l.top).len(), 2, "wide prediction fails raw");
        let rep = top_bottom_arrows_check(&p, &l, 3, 22);
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(rep.notes.len(), 1);

        let p2 = relevel_by_theta_inf(&p, 3).unwrap();
        assert_eq!(
            (p2.theta_of(0), p2.theta_of(1), p2.theta_of(2)),
            (1, 1, 2)
        );
        assert!(p2.conflations()[0].stable);
    }

    #[test]
    fn duality_holds_on_tiny() {
        let p = tiny();
        let l = tiny_lattice(&p);
        let rep = dual_lattice_check(&p, &l, 22, 1);
        assert!(rep.ok(), "{:?}", rep.violations);
    }

    #[test]
    fn zero_presentation_degenerates_gracefully() {
        let p = CategoryPresentation::load("name = \"zero\"").unwrap();
        let l = build_lattice(&p, enumerate_tors(&p, 22, 1).unwrap());
        assert_eq!(l.len(), 1);
        assert!(l.covers.is_empty());
        assert_eq!(l.bottom, l.top);
        assert!(check_lattice_laws(&p, &l).ok());
        assert!(check_semidistributive(&p, &l, 4).ok());
        assert!(check_algebraic(&p, &l).ok());
        assert!(top_bottom_arrows_check(&p, &l, 3, 22).ok());
        assert!(dual_lattice_check(&p, &l, 22, 1).ok());
    }
}
