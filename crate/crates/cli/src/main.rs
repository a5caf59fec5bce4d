//! Command line front end: loads a presentation file, dispatches to the
//! engine, and prints line-oriented reports. Output is canonical and
//! byte-stable for a given input and flag set; the selftest subcommand
//! replays the bundled corpus against committed expected outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::exit;

use clap::{ArgAction, Parser, Subcommand};

use exlen_core::checks::{run_all_checks, CheckOptions, CheckRun};
use exlen_core::filt::{filt_closure, semibrick_check, simples, strata, Subcat};
use exlen_core::lattice::{
    build_lattice, interval_check, irr_bijection_check, irr_elements, label_all_covers,
    relevel_by_theta_inf, TorsLattice,
};
use exlen_core::model::CategoryPresentation;
use exlen_core::tautilt::{
    bijection_check, enough_injectives_check, enough_projectives_check, support_tors,
    theta_injectives, theta_projectives,
};
use exlen_core::torsion::{enumerate_tors, perp_right, torsion_pair_of};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_VALIDATION: i32 = 2;
const EXIT_CONTRACT: i32 = 3;
const EXIT_SELFTEST: i32 = 4;

#[derive(Parser)]
#[command(name = "exlen", about = "torsion lattices of finite length-category presentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Parallel workers for the enumeration scans.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Refuse presentations with more indecomposables than this.
    #[arg(long = "max-indecs", global = true, default_value_t = 22)]
    max_indecs: usize,

    /// Multiplicity cap for filtration length searches.
    #[arg(long = "mult-cap", global = true, default_value_t = 3)]
    mult_cap: u32,

    /// Largest subset size in the semidistributivity scan.
    #[arg(long = "sd-bound", global = true, default_value_t = 4)]
    sd_bound: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check the presentation against its own axioms.
    Validate { file: PathBuf },
    /// Print the brick strata and the length-wide verdict.
    Strata { file: PathBuf },
    /// Print the simple objects of the whole category.
    Simples { file: PathBuf },
    /// List all semibricks, marking simple-minded systems.
    Semibricks {
        file: PathBuf,
        /// Print only the number of semibricks.
        #[arg(long)]
        count: bool,
        /// Decide the system marking with stable conflations only.
        #[arg(long = "stable-only", action = ArgAction::Set, default_value_t = false, value_name = "BOOL")]
        stable_only: bool,
    },
    /// List the torsion classes.
    Tors {
        file: PathBuf,
        /// Print only the number of classes.
        #[arg(long)]
        count: bool,
        /// Print each class with its torsion-free partner.
        #[arg(long)]
        pairs: bool,
    },
    /// Print the labeled Hasse quiver, or write it as DOT.
    Hasse {
        file: PathBuf,
        /// Write a DOT graph to this path instead of printing text.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Run the full verification battery, one verdict per check.
    Check { file: PathBuf },
    /// Check every interval of the lattice individually.
    Intervals { file: PathBuf },
    /// Support tilting data per torsion class.
    Tautilt {
        file: PathBuf,
        /// Emit a tab-separated pairing table instead of prose rows.
        #[arg(long)]
        table: bool,
    },
    /// Full structured summary: artifacts plus every check verdict.
    Report { file: PathBuf },
    /// Replay the bundled corpus against committed expected outputs.
    Selftest,
}

struct Opts {
    bound: usize,
    mult_cap: u32,
    sd_bound: usize,
    jobs: usize,
}

impl Opts {
    fn check_options(&self) -> CheckOptions {
        CheckOptions {
            bound: self.bound,
            mult_cap: self.mult_cap,
            sd_bound: self.sd_bound,
            jobs: self.jobs,
        }
    }
}

struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> CliError {
        CliError { code: EXIT_USAGE, msg: msg.into() }
    }
}

/// Commands in selftest-friendly form: no paths, output as a string.
enum CmdKind {
    Validate,
    Strata,
    Simples,
    Semibricks { count: bool, stable_only: bool },
    Tors { count: bool, pairs: bool },
    HasseText,
    HasseDot,
    Check,
    Intervals,
    Tautilt { table: bool },
    Report,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    exit(EXIT_OK);
                }
                _ => {
                    eprint!("{e}");
                    exit(EXIT_USAGE);
                }
            }
        }
    };
    let opts = Opts {
        bound: cli.max_indecs,
        mult_cap: cli.mult_cap,
        sd_bound: cli.sd_bound,
        jobs: cli.jobs.max(1),
    };
    match dispatch(&cli.command, &opts) {
        Ok((out, code)) => {
            print!("{out}");
            exit(code);
        }
        Err(e) => {
            eprintln!("error: {}", e.msg);
            exit(e.code);
        }
    }
}

fn dispatch(cmd: &Command, opts: &Opts) -> Result<(String, i32), CliError> {
    let kind_and_file: (CmdKind, &PathBuf) = match cmd {
        Command::Validate { file } => (CmdKind::Validate, file),
        Command::Strata { file } => (CmdKind::Strata, file),
        Command::Simples { file } => (CmdKind::Simples, file),
        Command::Semibricks { file, count, stable_only } => {
            (CmdKind::Semibricks { count: *count, stable_only: *stable_only }, file)
        }
        Command::Tors { file, count, pairs } => {
            (CmdKind::Tors { count: *count, pairs: *pairs }, file)
        }
        Command::Hasse { file, dot } => {
            let p = load(file)?;
            return match dot {
                None => run_cmd(&p, &CmdKind::HasseText, opts),
                Some(path) => {
                    let (graph, code) = run_cmd(&p, &CmdKind::HasseDot, opts)?;
                    std::fs::write(path, graph).map_err(|e| {
                        CliError::usage(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Ok((String::new(), code))
                }
            };
        }
        Command::Check { file } => (CmdKind::Check, file),
        Command::Intervals { file } => (CmdKind::Intervals, file),
        Command::Tautilt { file, table } => (CmdKind::Tautilt { table: *table }, file),
        Command::Report { file } => (CmdKind::Report, file),
        Command::Selftest => return Ok(selftest(opts)),
    };
    let p = load(kind_and_file.1)?;
    run_cmd(&p, &kind_and_file.0, opts)
}

fn load(path: &Path) -> Result<CategoryPresentation, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    CategoryPresentation::load(&text)
        .map_err(|e| CliError { code: EXIT_VALIDATION, msg: e.to_string() })
}

fn run_cmd(
    p: &CategoryPresentation,
    kind: &CmdKind,
    opts: &Opts,
) -> Result<(String, i32), CliError> {
    match kind {
        CmdKind::Validate => Ok(cmd_validate(p)),
        CmdKind::Strata => Ok(cmd_strata(p, opts)),
        CmdKind::Simples => Ok(cmd_simples(p)),
        CmdKind::Semibricks { count, stable_only } => {
            cmd_semibricks(p, opts, *count, *stable_only)
        }
        CmdKind::Tors { count, pairs } => {
            let l = lattice_of(p, opts)?;
            Ok(cmd_tors(p, &l, *count, *pairs))
        }
        CmdKind::HasseText => {
            let l = lattice_of(p, opts)?;
            Ok(cmd_hasse(p, &l, false))
        }
        CmdKind::HasseDot => {
            let l = lattice_of(p, opts)?;
            Ok(cmd_hasse(p, &l, true))
        }
        CmdKind::Check => {
            let run = battery(p, opts)?;
            Ok(cmd_check(&run))
        }
        CmdKind::Intervals => {
            let l = lattice_of(p, opts)?;
            Ok(cmd_intervals(p, &l))
        }
        CmdKind::Tautilt { table } => {
            let l = lattice_of(p, opts)?;
            Ok(cmd_tautilt(p, &l, *table))
        }
        CmdKind::Report => {
            let run = battery(p, opts)?;
            let l = lattice_of(p, opts)?;
            Ok(cmd_report(p, &l, &run, opts))
        }
    }
}

fn lattice_of(p: &CategoryPresentation, opts: &Opts) -> Result<TorsLattice, CliError> {
    let tors = enumerate_tors(p, opts.bound, opts.jobs)
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(build_lattice(p, tors))
}

fn battery(p: &CategoryPresentation, opts: &Opts) -> Result<CheckRun, CliError> {
    run_all_checks(p, &opts.check_options()).map_err(|e| CliError::usage(e.to_string()))
}

fn cmd_validate(p: &CategoryPresentation) -> (String, i32) {
    let violations = p.validate();
    if violations.is_empty() {
        let out = format!(
            "presentation {} is valid: {} indecomposables, {} conflations\n",
            p.name,
            p.num_indecs(),
            p.conflations().len()
        );
        (out, EXIT_OK)
    } else {
        let mut out = String::new();
        for v in &violations {
            let _ = writeln!(out, "{v}");
        }
        (out, EXIT_VALIDATION)
    }
}

fn cmd_strata(p: &CategoryPresentation, opts: &Opts) -> (String, i32) {
    let mut out = String::new();
    let Some(s) = strata(p) else {
        out.push_str("empty presentation\n");
        return (out, EXIT_OK);
    };
    let _ = writeln!(out, "theta_1 = {}", s.theta1.key(p));
    for (lv, members) in &s.levels {
        let _ = writeln!(out, "level {lv} = {}", members.key(p));
    }
    let _ = writeln!(out, "theta_inf = {}", s.theta_inf.key(p));
    if s.theta1 == s.theta_inf {
        let _ = writeln!(out, "length wide: yes");
        let full = Subcat::full(p);
        match simples(p, full) {
            Ok(sim) => {
                let _ = writeln!(out, "simples = {}", sim.key(p));
            }
            Err(e) => {
                let _ = writeln!(out, "simples: {e}");
                return (out, EXIT_CONTRACT);
            }
        }
        (out, EXIT_OK)
    } else {
        let _ = writeln!(out, "length wide: no");
        match relevel_by_theta_inf(p, opts.mult_cap) {
            Ok(p2) => {
                let levels: Vec<String> = (0..p2.num_indecs())
                    .map(|i| format!("{}:{}", p2.id_of(i), p2.theta_of(i)))
                    .collect();
                let _ = writeln!(out, "relevelled theta: {}", levels.join(" "));
                (out, EXIT_OK)
            }
            Err(e) => {
                let _ = writeln!(out, "relevel failed: {e}");
                (out, EXIT_CONTRACT)
            }
        }
    }
}

fn cmd_simples(p: &CategoryPresentation) -> (String, i32) {
    match simples(p, Subcat::full(p)) {
        Ok(sim) => (format!("simples = {}\n", sim.key(p)), EXIT_OK),
        Err(e) => (format!("simples: {e}\n"), EXIT_CONTRACT),
    }
}

fn cmd_semibricks(
    p: &CategoryPresentation,
    opts: &Opts,
    count: bool,
    stable_only: bool,
) -> Result<(String, i32), CliError> {
    let n = p.num_indecs();
    if n > opts.bound {
        return Err(CliError::usage(format!(
            "{n} indecomposables exceed the enumeration bound {}; raise the bound to proceed",
            opts.bound
        )));
    }
    let mut found: Vec<Subcat> = (0u32..1 << n)
        .map(Subcat)
        .filter(|&s| semibrick_check(p, s))
        .collect();
    found.sort_by(|a, b| a.canonical_cmp(*b));
    if count {
        return Ok((format!("{}\n", found.len()), EXIT_OK));
    }
    let full = Subcat::full(p);
    let mut out = String::new();
    for s in found {
        if filt_closure(p, s, stable_only) == full {
            let _ = writeln!(out, "{}  [sms]", s.key(p));
        } else {
            let _ = writeln!(out, "{}", s.key(p));
        }
    }
    Ok((out, EXIT_OK))
}

fn cmd_tors(p: &CategoryPresentation, l: &TorsLattice, count: bool, pairs: bool) -> (String, i32) {
    if count {
        return (format!("{}\n", l.len()), EXIT_OK);
    }
    let mut out = String::new();
    let mut code = EXIT_OK;
    for &t in &l.elements {
        if pairs {
            match torsion_pair_of(p, t) {
                Ok((tors, free)) => {
                    let _ = writeln!(out, "T = {}  F = {}", tors.key(p), free.key(p));
                }
                Err(e) => {
                    let _ = writeln!(out, "error: {e}");
                    code = EXIT_CONTRACT;
                }
            }
        } else {
            let _ = writeln!(out, "{}", t.key(p));
        }
    }
    (out, code)
}

fn cmd_hasse(p: &CategoryPresentation, l: &TorsLattice, dot: bool) -> (String, i32) {
    let labels = match label_all_covers(p, l) {
        Ok(labels) => labels,
        Err(e) => {
            return (format!("error: {e}\n"), EXIT_CONTRACT);
        }
    };
    let mut out = String::new();
    if dot {
        out.push_str("digraph tors {\n");
        out.push_str("  node [shape=box];\n");
        for &t in &l.elements {
            let _ = writeln!(out, "  \"{}\";", t.key(p));
        }
        for (&(up, lo), &s) in l.covers.iter().zip(&labels) {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                l.elements[up].key(p),
                l.elements[lo].key(p),
                p.id_of(s)
            );
        }
        out.push_str("}\n");
    } else {
        for (&(up, lo), &s) in l.covers.iter().zip(&labels) {
            let _ = writeln!(
                out,
                "{} > {}  [{}]",
                l.elements[up].key(p),
                l.elements[lo].key(p),
                p.id_of(s)
            );
        }
    }
    (out, EXIT_OK)
}

fn verdict_lines(run: &CheckRun, with_notes: bool, out: &mut String) -> (usize, usize) {
    let mut failed = 0;
    for rep in &run.reports {
        if rep.ok() {
            let _ = writeln!(out, "{}: ok", rep.name);
        } else {
            failed += 1;
            let _ = writeln!(out, "{}: FAIL", rep.name);
            for v in &rep.violations {
                let _ = writeln!(out, "  ! {v}");
            }
        }
        if with_notes {
            for n in &rep.notes {
                let _ = writeln!(out, "  - {n}");
            }
        }
    }
    (run.reports.len(), failed)
}

fn battery_exit(run: &CheckRun) -> i32 {
    if !run.reports[0].ok() {
        EXIT_VALIDATION
    } else if !run.ok() {
        EXIT_CONTRACT
    } else {
        EXIT_OK
    }
}

fn cmd_check(run: &CheckRun) -> (String, i32) {
    let mut out = String::new();
    let (total, failed) = verdict_lines(run, false, &mut out);
    if failed == 0 {
        let _ = writeln!(out, "all {total} checks passed");
    } else {
        let _ = writeln!(out, "{failed} of {total} checks failed");
    }
    (out, battery_exit(run))
}

fn cmd_intervals(p: &CategoryPresentation, l: &TorsLattice) -> (String, i32) {
    let mut out = String::new();
    let mut code = EXIT_OK;
    let mut count = 0;
    for lo in 0..l.len() {
        for up in 0..l.len() {
            if !l.le(lo, up) {
                continue;
            }
            count += 1;
            let mut rep = interval_check(p, l, lo, up);
            rep.absorb(irr_bijection_check(p, l, lo, up));
            let name = format!("[{}, {}]", l.elements[lo].key(p), l.elements[up].key(p));
            if rep.ok() {
                let _ = writeln!(out, "{name}: ok");
            } else {
                code = EXIT_CONTRACT;
                let _ = writeln!(out, "{name}: FAIL");
                for v in &rep.violations {
                    let _ = writeln!(out, "  ! {v}");
                }
            }
        }
    }
    let _ = writeln!(out, "{count} intervals checked");
    (out, code)
}

fn cmd_tautilt(p: &CategoryPresentation, l: &TorsLattice, table: bool) -> (String, i32) {
    let mut out = String::new();
    if table {
        out.push_str("T\tF\tP(T)\tI(F)\n");
        for &t in &l.elements {
            let free = perp_right(p, t);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                t.key(p),
                free.key(p),
                theta_projectives(p, t).key(p),
                theta_injectives(p, free).key(p)
            );
        }
        return (out, EXIT_OK);
    }
    for &t in &l.elements {
        let rec = support_tors(p, t);
        let free = perp_right(p, t);
        let _ = writeln!(
            out,
            "T = {}  P = {}  F = {}  I = {}  support: {}",
            t.key(p),
            rec.ptors.key(p),
            free.key(p),
            theta_injectives(p, free).key(p),
            if rec.support { "yes" } else { "no" }
        );
    }
    if enough_projectives_check(p) && enough_injectives_check(p) {
        let rep = bijection_check(p, &l.elements);
        if rep.ok() {
            out.push_str("bijections: ok\n");
            (out, EXIT_OK)
        } else {
            out.push_str("bijections: FAIL\n");
            for v in &rep.violations {
                let _ = writeln!(out, "  ! {v}");
            }
            (out, EXIT_CONTRACT)
        }
    } else {
        out.push_str("bijections skipped: not enough projectives or injectives\n");
        (out, EXIT_OK)
    }
}

fn cmd_report(
    p: &CategoryPresentation,
    l: &TorsLattice,
    run: &CheckRun,
    opts: &Opts,
) -> (String, i32) {
    let mut out = String::new();
    let _ = writeln!(out, "name: {}", p.name);
    let _ = writeln!(out, "indecomposables: {}", p.num_indecs());
    let _ = writeln!(out, "conflations: {}", p.conflations().len());
    match strata(p) {
        None => {
            let _ = writeln!(out, "empty presentation");
        }
        Some(s) => {
            let _ = writeln!(out, "theta_1 = {}", s.theta1.key(p));
            for (lv, members) in &s.levels {
                let _ = writeln!(out, "level {lv} = {}", members.key(p));
            }
            let _ = writeln!(out, "theta_inf = {}", s.theta_inf.key(p));
            let _ = writeln!(
                out,
                "length wide: {}",
                if s.theta1 == s.theta_inf { "yes" } else { "no" }
            );
        }
    }
    let _ = writeln!(out, "torsion classes: {}", l.len());
    let _ = writeln!(out, "covers: {}", l.covers.len());
    let (j_irr, m_irr) = irr_elements(l);
    let _ = writeln!(out, "join-irreducible: {}", j_irr.len());
    let _ = writeln!(out, "meet-irreducible: {}", m_irr.len());
    let n = p.num_indecs();
    if n <= opts.bound {
        let semibricks: Vec<Subcat> = (0u32..1 << n)
            .map(Subcat)
            .filter(|&s| semibrick_check(p, s))
            .collect();
        let full = Subcat::full(p);
        let sms = semibricks.iter().filter(|&&s| filt_closure(p, s, false) == full).count();
        let _ = writeln!(out, "semibricks: {}", semibricks.len());
        let _ = writeln!(out, "simple-minded systems: {sms}");
    }
    let full = Subcat::full(p);
    let _ = writeln!(out, "theta-projectives = {}", theta_projectives(p, full).key(p));
    let _ = writeln!(out, "theta-injectives = {}", theta_injectives(p, full).key(p));
    let _ = writeln!(
        out,
        "enough projectives: {}",
        if enough_projectives_check(p) { "yes" } else { "no" }
    );
    let _ = writeln!(
        out,
        "enough injectives: {}",
        if enough_injectives_check(p) { "yes" } else { "no" }
    );
    let support = l.elements.iter().filter(|&&t| support_tors(p, t).support).count();
    let _ = writeln!(out, "support torsion classes: {support}");
    let (total, failed) = verdict_lines(run, true, &mut out);
    if failed == 0 {
        let _ = writeln!(out, "all {total} checks passed");
    } else {
        let _ = writeln!(out, "{failed} of {total} checks failed");
    }
    (out, battery_exit(run))
}

struct SelfTestCase {
    label: &'static str,
    corpus: &'static str,
    kind: CmdKind,
    expected: &'static str,
    expected_code: i32,
}

fn selftest_cases() -> Vec<SelfTestCase> {
    vec![
        SelfTestCase {
            label: "ka2 validate",
            corpus: include_str!("../../../corpus/ka2.toml"),
            kind: CmdKind::Validate,
            expected: include_str!("../expected/ka2.validate.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "bad_stability validate",
            corpus: include_str!("../../../corpus/bad_stability.toml"),
            kind: CmdKind::Validate,
            expected: include_str!("../expected/bad_stability.validate.txt"),
            expected_code: EXIT_VALIDATION,
        },
        SelfTestCase {
            label: "da3 strata",
            corpus: include_str!("../../../corpus/da3.toml"),
            kind: CmdKind::Strata,
            expected: include_str!("../expected/da3.strata.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "ladder strata",
            corpus: include_str!("../../../corpus/ladder.toml"),
            kind: CmdKind::Strata,
            expected: include_str!("../expected/ladder.strata.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "chain2 simples",
            corpus: include_str!("../../../corpus/chain2.toml"),
            kind: CmdKind::Simples,
            expected: include_str!("../expected/chain2.simples.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "da3 semibricks",
            corpus: include_str!("../../../corpus/da3.toml"),
            kind: CmdKind::Semibricks { count: false, stable_only: false },
            expected: include_str!("../expected/da3.semibricks.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "ka2 tors",
            corpus: include_str!("../../../corpus/ka2.toml"),
            kind: CmdKind::Tors { count: false, pairs: false },
            expected: include_str!("../expected/ka2.tors.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "zero tors",
            corpus: include_str!("../../../corpus/zero.toml"),
            kind: CmdKind::Tors { count: false, pairs: false },
            expected: include_str!("../expected/zero.tors.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "ka2 tors pairs",
            corpus: include_str!("../../../corpus/ka2.toml"),
            kind: CmdKind::Tors { count: false, pairs: true },
            expected: include_str!("../expected/ka2.pairs.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "da3 hasse",
            corpus: include_str!("../../../corpus/da3.toml"),
            kind: CmdKind::HasseText,
            expected: include_str!("../expected/da3.hasse.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "da3 hasse dot",
            corpus: include_str!("../../../corpus/da3.toml"),
            kind: CmdKind::HasseDot,
            expected: include_str!("../expected/da3.hasse.dot"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "da3 check",
            corpus: include_str!("../../../corpus/da3.toml"),
            kind: CmdKind::Check,
            expected: include_str!("../expected/da3.check.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "chain2 check",
            corpus: include_str!("../../../corpus/chain2.toml"),
            kind: CmdKind::Check,
            expected: include_str!("../expected/chain2.check.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "ladder check",
            corpus: include_str!("../../../corpus/ladder.toml"),
            kind: CmdKind::Check,
            expected: include_str!("../expected/ladder.check.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "bad_facsub check",
            corpus: include_str!("../../../corpus/bad_facsub.toml"),
            kind: CmdKind::Check,
            expected: include_str!("../expected/bad_facsub.check.txt"),
            expected_code: EXIT_CONTRACT,
        },
        SelfTestCase {
            label: "bad_missing_conflation check",
            corpus: include_str!("../../../corpus/bad_missing_conflation.toml"),
            kind: CmdKind::Check,
            expected: include_str!("../expected/bad_missing_conflation.check.txt"),
            expected_code: EXIT_CONTRACT,
        },
        SelfTestCase {
            label: "ladder intervals",
            corpus: include_str!("../../../corpus/ladder.toml"),
            kind: CmdKind::Intervals,
            expected: include_str!("../expected/ladder.intervals.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "ka2 tautilt",
            corpus: include_str!("../../../corpus/ka2.toml"),
            kind: CmdKind::Tautilt { table: false },
            expected: include_str!("../expected/ka2.tautilt.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "da3 tautilt table",
            corpus: include_str!("../../../corpus/da3.toml"),
            kind: CmdKind::Tautilt { table: true },
            expected: include_str!("../expected/da3.tautilt_table.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "ka2 report",
            corpus: include_str!("../../../corpus/ka2.toml"),
            kind: CmdKind::Report,
            expected: include_str!("../expected/ka2.report.txt"),
            expected_code: EXIT_OK,
        },
        SelfTestCase {
            label: "brick1 report",
            corpus: include_str!("../../../corpus/brick1.toml"),
            kind: CmdKind::Report,
            expected: include_str!("../expected/brick1.report.txt"),
            expected_code: EXIT_OK,
        },
    ]
}

fn selftest(opts: &Opts) -> (String, i32) {
    let mut out = String::new();
    let mut mismatches = 0;
    let cases = selftest_cases();
    for case in &cases {
        let result = CategoryPresentation::load(case.corpus)
            .map_err(|e| CliError { code: EXIT_VALIDATION, msg: e.to_string() })
            .and_then(|p| run_cmd(&p, &case.kind, opts));
        let (got, code) = match result {
            Ok(pair) => pair,
            Err(e) => (format!("error: {}\n", e.msg), e.code),
        };
        if got == case.expected && code == case.expected_code {
            let _ = writeln!(out, "case {}: ok", case.label);
            continue;
        }
        mismatches += 1;
        let _ = writeln!(out, "case {}: MISMATCH", case.label);
        if code != case.expected_code {
            let _ = writeln!(out, "  exit code {code}, expected {}", case.expected_code);
        }
        for (i, (g, e)) in got.lines().zip(case.expected.lines()).enumerate() {
            if g != e {
                let _ = writeln!(out, "  line {}: got      {g}", i + 1);
                let _ = writeln!(out, "  line {}: expected {e}", i + 1);
                break;
            }
        }
        let (gn, en) = (got.lines().count(), case.expected.lines().count());
        if gn != en {
            let _ = writeln!(out, "  {gn} lines, expected {en}");
        }
    }
    if mismatches == 0 {
        let _ = writeln!(out, "selftest: {} cases, all ok", cases.len());
        (out, EXIT_OK)
    } else {
        let _ = writeln!(out, "selftest: {} cases, {mismatches} mismatches", cases.len());
        (out, EXIT_SELFTEST)
    }
}
