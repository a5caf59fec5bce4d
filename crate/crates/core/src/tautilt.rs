//! Projectives and injectives relative to the length function, support
//! torsion classes, and the bijections between support tilting subcategories
//! and the two sides of the lattice.

use crate::filt::Subcat;
use crate::model::CategoryPresentation;
use crate::report::Report;
use crate::torsion::{fac_theta, is_torsion_class, perp_left, perp_right, sub_theta, t_closure};

/// Members of `scope` with no extension into `scope`.
pub fn theta_projectives(p: &CategoryPresentation, scope: Subcat) -> Subcat {
    let mut out = Subcat::EMPTY;
    for m in scope.iter() {
        if scope.iter().all(|t| !p.ext_nonzero(m, t)) {
            out.insert(m);
        }
    }
    out
}

/// Members of `scope` with no extension out of `scope` into them.
pub fn theta_injectives(p: &CategoryPresentation, scope: Subcat) -> Subcat {
    let mut out = Subcat::EMPTY;
    for m in scope.iter() {
        if scope.iter().all(|t| !p.ext_nonzero(t, m)) {
            out.insert(m);
        }
    }
    out
}

/// Every object is a quotient target of the projectives.
pub fn enough_projectives_check(p: &CategoryPresentation) -> bool {
    let full = Subcat::full(p);
    fac_theta(p, theta_projectives(p, full)) == full
}

/// Every object is a subobject source of the injectives.
pub fn enough_injectives_check(p: &CategoryPresentation) -> bool {
    let full = Subcat::full(p);
    sub_theta(p, theta_injectives(p, full)) == full
}

/// No extension from `s` into anything it generates by quotients.
pub fn tau_rigid_check(p: &CategoryPresentation, s: Subcat) -> bool {
    let fac = fac_theta(p, s);
    s.iter().all(|x| fac.iter().all(|m| !p.ext_nonzero(x, m)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauTiltRecord {
    pub tors: Subcat,
    /// Projectives of `tors` relative to itself.
    pub ptors: Subcat,
    /// Whether `tors` is regenerated as the quotient closure of `ptors`.
    pub support: bool,
}

/// The support record of a torsion class: its relative projectives and the
/// finite-case support criterion tors = fac(ptors).
pub fn support_tors(p: &CategoryPresentation, t: Subcat) -> TauTiltRecord {
    let ptors = theta_projectives(p, t);
    let support = fac_theta(p, ptors) == t;
    TauTiltRecord { tors: t, ptors, support }
}

/// Whether `s` is a support tilting subcategory: its quotient closure is a
/// torsion class whose relative projectives are exactly `s`, and `s` has no
/// extensions into that closure.
pub fn stau_tilt_check(p: &CategoryPresentation, s: Subcat) -> bool {
    let t = fac_theta(p, s);
    is_torsion_class(p, t) && theta_projectives(p, t) == s && tau_rigid_check(p, s)
}

/// For rigid subcategories the quotient closure is already extension-closed,
/// so it coincides with the torsion closure. Exhaustive over subsets at desk
/// scale, over singletons and pairs beyond it.
pub fn tau_rigid_closure_check(p: &CategoryPresentation) -> Report {
    let mut rep = Report::new("rigid-quotient-closure");
    let n = p.num_indecs();
    let run = |s: Subcat, rep: &mut Report| {
        if tau_rigid_check(p, s) && t_closure(p, s) != fac_theta(p, s) {
            rep.fail(format!(
                "{} is rigid but fac {} differs from the torsion closure {}",
                s.key(p),
                fac_theta(p, s).key(p),
                t_closure(p, s).key(p)
            ));
        }
    };
    if n <= 12 {
        for mask in 0..(1u32 << n) {
            run(Subcat(mask), &mut rep);
        }
        rep.note(format!("all 2^{n} subsets checked"));
    } else {
        for i in 0..n {
            for j in i..n {
                run(Subcat::from_indices(&[i, j]), &mut rep);
            }
        }
        rep.note("singletons and pairs checked".to_string());
    }
    rep
}

/// A projective never sits as the third term of a non-split stable
/// conflation with indecomposable ends; cross-validates the declared
/// extension table against the conflation list.
pub fn proj_conflation_check(p: &CategoryPresentation) -> Report {
    let mut rep = Report::new("projective-conflation-consistency");
    let projs = theta_projectives(p, Subcat::full(p));
    for cf in p.conflations() {
        if cf.split || !cf.stable || cf.a.total_mult() != 1 || cf.c.total_mult() != 1 {
            continue;
        }
        let end = Subcat(cf.c.support()).iter().next().unwrap();
        if projs.contains(end) {
            rep.fail(format!(
                "projective {} ends a non-split stable conflation",
                p.id_of(end)
            ));
        }
    }
    rep.note(format!("projectives {}", projs.key(p)));
    rep
}

/// The three bijections over a complete list of torsion classes: classes
/// correspond to their relative projectives, torsion-free classes to their
/// relative injectives, and the composite map between the two tilting sides
/// inverts as stated.
pub fn bijection_check(p: &CategoryPresentation, tors: &[Subcat]) -> Report {
    let mut rep = Report::new("support-tilting-bijections");
    if !enough_projectives_check(p) {
        rep.fail("not enough projectives: some object is no quotient of them".to_string());
        return rep;
    }
    if !enough_injectives_check(p) {
        rep.fail("not enough injectives: some object is no subobject of them".to_string());
        return rep;
    }

    let mut stau: Vec<Subcat> = Vec::with_capacity(tors.len());
    for &t in tors {
        let rec = support_tors(p, t);
        if !rec.support {
            rep.fail(format!(
                "{} fails the finite-case support criterion",
                t.key(p)
            ));
        }
        if !tau_rigid_check(p, rec.ptors) {
            rep.fail(format!("P({}) = {} is not rigid", t.key(p), rec.ptors.key(p)));
        }
        let back = theta_projectives(p, fac_theta(p, rec.ptors));
        if back != rec.ptors {
            rep.fail(format!(
                "P(fac(P({}))) = {} does not return to {}",
                t.key(p),
                back.key(p),
                rec.ptors.key(p)
            ));
        }
        if stau.contains(&rec.ptors) {
            rep.fail(format!(
                "distinct torsion classes share the projectives {}",
                rec.ptors.key(p)
            ));
        }
        stau.push(rec.ptors);
    }

    let torf: Vec<Subcat> = tors.iter().map(|&t| perp_right(p, t)).collect();
    let mut itau: Vec<Subcat> = Vec::with_capacity(torf.len());
    for &f in &torf {
        let inj = theta_injectives(p, f);
        if sub_theta(p, inj) != f {
            rep.fail(format!(
                "sub(I({})) = {} does not return to the class",
                f.key(p),
                sub_theta(p, inj).key(p)
            ));
        }
        if itau.contains(&inj) {
            rep.fail(format!(
                "distinct torsion-free classes share the injectives {}",
                inj.key(p)
            ));
        }
        itau.push(inj);
    }

    for (k, &s) in stau.iter().enumerate() {
        let image = theta_injectives(p, perp_right(p, fac_theta(p, s)));
        if image != itau[k] {
            rep.fail(format!(
                "composite image of {} is {}, expected {}",
                s.key(p),
                image.key(p),
                itau[k].key(p)
            ));
        }
        let back = theta_projectives(p, perp_left(p, sub_theta(p, image)));
        if back != s {
            rep.fail(format!(
                "composite inverse returns {} instead of {}",
                back.key(p),
                s.key(p)
            ));
        }
    }

    rep.note(format!(
        "{} support torsion classes (finite-case criterion), {} tilting subcategories each side",
        tors.len(),
        stau.len()
    ));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torsion::enumerate_tors;

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

    fn sub(p: &CategoryPresentation, ids: &[&str]) -> Subcat {
        Subcat::from_indices(
            &ids.iter().map(|id| p.index_of(id).unwrap()).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn projectives_and_injectives() {
        let p = tiny();
        let full = Subcat::full(&p);
        assert_eq!(theta_projectives(&p, full), sub(&p, &["X", "E"]));
        assert_eq!(theta_injectives(&p, full), sub(&p, &["Y", "E"]));
        assert_eq!(theta_projectives(&p, Subcat::EMPTY), Subcat::EMPTY);
        // Scope matters: Y has no extension inside {Y, E}.
        assert_eq!(theta_projectives(&p, sub(&p, &["Y", "E"])), sub(&p, &["Y", "E"]));
        assert!(enough_projectives_check(&p));
        assert!(enough_injectives_check(&p));
    }

    #[test]
    fn rigidity() {
        let p = tiny();
        assert!(tau_rigid_check(&p, Subcat::EMPTY));
        assert!(tau_rigid_check(&p, sub(&p, &["X", "E"])));
        assert!(tau_rigid_check(&p, sub(&p, &["E"])));
        assert!(!tau_rigid_check(&p, sub(&p, &["X", "Y"])));
        let rep = tau_rigid_closure_check(&p);
        assert!(rep.ok(), "{:?}", rep.violations);
    }

    #[test]
    fn support_records() {
        let p = tiny();
        let rec = support_tors(&p, Subcat::full(&p));
        assert_eq!(rec.ptors, sub(&p, &["X", "E"]));
        assert!(rec.support);
        let rec = support_tors(&p, sub(&p, &["Y", "E"]));
        assert_eq!(rec.ptors, sub(&p, &["Y", "E"]));
        assert!(rec.support);
        let rec = support_tors(&p, Subcat::EMPTY);
        assert_eq!(rec.ptors, Subcat::EMPTY);
        assert!(rec.support);
    }

    #[test]
    fn support_tilting_membership() {
        let p = tiny();
        assert!(stau_tilt_check(&p, theta_projectives(&p, Subcat::full(&p))));
        assert!(stau_tilt_check(&p, sub(&p, &["X"])));
        assert!(stau_tilt_check(&p, sub(&p, &["Y", "E"])));
        // E alone misses the second projective of its quotient closure.
        assert!(!stau_tilt_check(&p, sub(&p, &["E"])));
        assert!(!stau_tilt_check(&p, sub(&p, &["X", "Y"])));
    }

    #[test]
    fn bijections_on_tiny() {
        let p = tiny();
        let tors = enumerate_tors(&p, 22, 1).unwrap();
        assert_eq!(tors.len(), 5);
        let rep = bijection_check(&p, &tors);
        assert!(rep.ok(), "{:?}", rep.violations);
        let rep = proj_conflation_check(&p);
        assert!(rep.ok(), "{:?}", rep.violations);
    }

    #[test]
    fn self_extension_blocks_everything() {
        let p = CategoryPresentation::load(
            r#"
            name = "selfext"
            indecs = [ { id = "A", theta = 1 } ]
            ext = [ { from = "A", to = "A" } ]
            "#,
        )
        .unwrap();
        assert!(p.validate().is_empty());
        assert_eq!(theta_projectives(&p, Subcat::full(&p)), Subcat::EMPTY);
        assert!(!enough_projectives_check(&p));
        assert!(!tau_rigid_check(&p, Subcat::full(&p)));
        let rep = bijection_check(&p, &[Subcat::EMPTY, Subcat::full(&p)]);
        assert!(!rep.ok());
    }

    #[test]
    fn zero_category_is_trivially_bijective() {
        let p = CategoryPresentation::load("name = \"zero\"").unwrap();
        let rep = bijection_check(&p, &[Subcat::EMPTY]);
        assert!(rep.ok(), "{:?}", rep.violations);
    }
}
