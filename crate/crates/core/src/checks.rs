//! The full verification battery over one presentation: strata, closure
//! calculus, lattice structure, labels, duality, and support tilting. Each
//! area reports separately so the CLI can print one verdict per line.

use crate::filt::{
    filt_length, length_wide_roundtrip, semibrick_check, simples, sms_check, strata, Subcat,
};
use crate::lattice::{
    brick_label, build_lattice, check_algebraic, check_lattice_laws, check_semidistributive,
    dual_lattice_check, interval_check, irr_bijection_check, standard_check,
    top_bottom_arrows_check, TorsLattice,
};
use crate::model::{
    CategoryPresentation, ObjClass, DEFAULT_ENUM_BOUND, DEFAULT_MULT_CAP, DEFAULT_SD_BOUND,
};
use crate::report::Report;
use crate::tautilt::{
    bijection_check, enough_injectives_check, enough_projectives_check, proj_conflation_check,
    tau_rigid_closure_check,
};
use crate::torsion::{
    enumerate_tors, f_closure, fac_theta, perp_left, perp_right, sub_theta, t_closure,
    torsion_pair_of, BoundExceeded,
};

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub bound: usize,
    pub mult_cap: u32,
    pub sd_bound: usize,
    pub jobs: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            bound: DEFAULT_ENUM_BOUND,
            mult_cap: DEFAULT_MULT_CAP,
            sd_bound: DEFAULT_SD_BOUND,
            jobs: 1,
        }
    }
}

#[derive(Debug)]
pub struct CheckRun {
    pub reports: Vec<Report>,
}

impl CheckRun {
    pub fn ok(&self) -> bool {
        self.reports.iter().all(|r| r.ok())
    }
}

/// Runs everything. A presentation that fails its own contract gets only the
/// contract report; nothing downstream is trustworthy. The enumeration bound
/// is the only hard stop.
pub fn run_all_checks(
    p: &CategoryPresentation,
    opts: &CheckOptions,
) -> Result<CheckRun, BoundExceeded> {
    let mut reports = Vec::new();

    let mut contract = Report::new("presentation-contract");
    for v in p.validate() {
        contract.fail(v.to_string());
    }
    let contract_ok = contract.ok();
    reports.push(contract);
    if !contract_ok {
        return Ok(CheckRun { reports });
    }

    reports.push(strata_report(p, opts));
    reports.push(semibrick_report(p, opts));

    let tors = enumerate_tors(p, opts.bound, opts.jobs)?;
    let l = build_lattice(p, tors);

    reports.push(closure_report(p, &l));
    reports.push(pair_report(p, &l));

    reports.push(check_lattice_laws(p, &l));
    reports.push(check_semidistributive(p, &l, opts.sd_bound));
    reports.push(check_algebraic(p, &l));
    reports.push(standard_check(p));
    reports.push(intervals_report(p, &l));
    reports.push(labels_report(p, &l));
    reports.push(top_bottom_arrows_check(p, &l, opts.mult_cap, opts.bound));
    reports.push(dual_lattice_check(p, &l, opts.bound, opts.jobs));

    let mut tilt = Report::new("support-tilting-bijections");
    if enough_projectives_check(p) && enough_injectives_check(p) {
        tilt = bijection_check(p, &l.elements);
    } else {
        tilt.note("skipped: not enough projectives or injectives");
    }
    reports.push(tilt);
    reports.push(tau_rigid_closure_check(p));
    reports.push(proj_conflation_check(p));

    Ok(CheckRun { reports })
}

fn strata_report(p: &CategoryPresentation, opts: &CheckOptions) -> Report {
    let mut rep = Report::new("strata");
    let Some(s) = strata(p) else {
        rep.note("empty presentation");
        return rep;
    };
    if !semibrick_check(p, s.theta_inf) {
        rep.fail(format!(
            "deepest stratum {} is not a semibrick",
            s.theta_inf.key(p)
        ));
    } else if !sms_check(p, s.theta_inf) {
        rep.fail(format!(
            "deepest stratum {} does not filter the whole category",
            s.theta_inf.key(p)
        ));
    }
    if s.theta1 == s.theta_inf {
        match simples(p, Subcat::full(p)) {
            Ok(sim) if sim == s.theta1 => {}
            Ok(sim) => rep.fail(format!(
                "simples {} differ from the minimal stratum {}",
                sim.key(p),
                s.theta1.key(p)
            )),
            Err(e) => rep.fail(e.to_string()),
        }
        for i in 0..p.num_indecs() {
            let fl = filt_length(p, s.theta1, &ObjClass::single(i), true, opts.mult_cap);
            if fl.length != Some(p.theta_of(i)) {
                rep.fail(format!(
                    "theta({}) = {} but its filtration length over {} is {:?}",
                    p.id_of(i),
                    p.theta_of(i),
                    s.theta1.key(p),
                    fl.length
                ));
            }
        }
        rep.note(format!("level one throughout; minimal stratum {}", s.theta1.key(p)));
    } else {
        rep.note(format!(
            "strata reach level {}; deepest stratum {}",
            s.levels.last().map(|&(lv, _)| lv).unwrap_or(1),
            s.theta_inf.key(p)
        ));
    }
    rep
}

fn semibrick_report(p: &CategoryPresentation, opts: &CheckOptions) -> Report {
    let mut rep = Report::new("semibrick-roundtrip");
    let n = p.num_indecs();
    if n > 12 {
        rep.note("exhaustive sweep skipped past 12 indecomposables");
        return rep;
    }
    let mut count = 0u32;
    for mask in 0..(1u32 << n) {
        let x = Subcat(mask);
        if !semibrick_check(p, x) {
            continue;
        }
        count += 1;
        if !length_wide_roundtrip(p, x, opts.mult_cap) {
            rep.fail(format!("semibrick {} fails the wide round trip", x.key(p)));
        }
    }
    rep.note(format!("{count} semibricks"));
    rep
}

fn closure_report(p: &CategoryPresentation, l: &TorsLattice) -> Report {
    let mut rep = Report::new("closure-operators");
    let n = p.num_indecs();
    let subsets: Vec<Subcat> = if n <= 12 {
        (0..(1u32 << n)).map(Subcat).collect()
    } else {
        let mut v = vec![Subcat::EMPTY];
        for i in 0..n {
            for j in i..n {
                v.push(Subcat::from_indices(&[i, j]));
            }
        }
        v
    };
    type Op = fn(&CategoryPresentation, Subcat) -> Subcat;
    let ops: [(&str, Op); 4] = [
        ("fac", fac_theta as Op),
        ("sub", sub_theta as Op),
        ("tors-closure", t_closure as Op),
        ("free-closure", f_closure as Op),
    ];
    for &(name, op) in &ops {
        for &s in &subsets {
            let c = op(p, s);
            if !s.is_subset_of(c) {
                rep.fail(format!("{name} is not extensive at {}", s.key(p)));
            }
            if op(p, c) != c {
                rep.fail(format!("{name} is not idempotent at {}", s.key(p)));
            }
            for m in 0..n {
                if s.contains(m) {
                    continue;
                }
                let mut bigger = s;
                bigger.insert(m);
                if !c.is_subset_of(op(p, bigger)) {
                    rep.fail(format!(
                        "{name} is not monotone from {} into {}",
                        s.key(p),
                        bigger.key(p)
                    ));
                }
            }
        }
    }
    for &s in &subsets {
        let c = t_closure(p, s);
        if l.index_of(c).is_none() {
            rep.fail(format!("closure {} is missing from the enumeration", c.key(p)));
            continue;
        }
        for &t in &l.elements {
            if s.is_subset_of(t) && !c.is_subset_of(t) {
                rep.fail(format!(
                    "closure of {} is not least: {} also contains the set",
                    s.key(p),
                    t.key(p)
                ));
            }
        }
    }
    rep.note(format!("{} subsets scanned", subsets.len()));
    rep
}

fn pair_report(p: &CategoryPresentation, l: &TorsLattice) -> Report {
    let mut rep = Report::new("torsion-pairs");
    for &t in &l.elements {
        match torsion_pair_of(p, t) {
            Ok((_, free)) => {
                if f_closure(p, free) != free {
                    rep.fail(format!(
                        "the perpendicular of {} is not a torsion-free class",
                        t.key(p)
                    ));
                }
                if perp_right(p, perp_left(p, free)) != free {
                    rep.fail(format!(
                        "double perpendicular fails on the free side of {}",
                        t.key(p)
                    ));
                }
            }
            Err(e) => rep.fail(e.to_string()),
        }
    }
    rep.note(format!("{} pairs", l.elements.len()));
    rep
}

fn intervals_report(p: &CategoryPresentation, l: &TorsLattice) -> Report {
    let mut rep = Report::new("intervals");
    let mut count = 0u32;
    for lo in 0..l.len() {
        for up in 0..l.len() {
            if !l.le(lo, up) {
                continue;
            }
            count += 1;
            rep.absorb(interval_check(p, l, lo, up));
            rep.absorb(irr_bijection_check(p, l, lo, up));
        }
    }
    rep.note(format!("{count} intervals"));
    rep
}

fn labels_report(p: &CategoryPresentation, l: &TorsLattice) -> Report {
    let mut rep = Report::new("cover-labels");
    for &(up, lo) in &l.covers {
        if let Err(e) = brick_label(p, l.elements[up], l.elements[lo]) {
            rep.fail(e.to_string());
        }
    }
    rep.note(format!("{} covers", l.covers.len()));
    rep
}
