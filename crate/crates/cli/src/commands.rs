//! Command bodies. Each returns a human table, a JSON report and an ok bit.

use std::fmt::Write as _;
use std::path::Path;

use regent::docs::{parse_doc, parse_set_literal, to_json, CoverDoc, MapDoc, SftDoc, SpaceDoc, Workspace, WorkspaceConfig};
use regent::entropy::EntropyReport;
use regent::product::product_space_with_limits;
use regent::suite::{run_suite, SuiteConfig, SuiteReport};
use regent::{
    entropy_rel_cover, entropy_sup_invariant, entropy_whole_space, finest_regular_cover, invariant_sets,
    spectral_entropy, sft_entropy, Certificate, EntropyOptions, LogBase, RMap, RMapStatus,
};
use serde_json::json;

use crate::{read, CliError, Rendered};

/// Slack for comparing floating-point logarithms of exact counts.
const LOG_SLACK: f64 = 1e-12;

fn load_space(ws: &mut Workspace, name: &str, path: &Path) -> Result<(), CliError> {
    let doc: SpaceDoc = parse_doc(&path.display().to_string(), &read(path)?)?;
    ws.add_space(name, &doc)?;
    Ok(())
}

fn map_doc(path: &Path) -> Result<MapDoc, CliError> {
    Ok(parse_doc(&path.display().to_string(), &read(path)?)?)
}

fn status_line(f: &RMap) -> String {
    match f.status() {
        RMapStatus::Verified => "R-map: true".to_string(),
        RMapStatus::Failed { witness } => format!(
            "R-map: false, preimage of regular open {witness} is {}",
            f.preimage(witness)
        ),
    }
}

pub fn check(space: &Path, map: Option<&Path>) -> Result<Rendered, CliError> {
    let mut ws = Workspace::new(WorkspaceConfig::default());
    load_space(&mut ws, "space", space)?;
    let f = match map {
        Some(p) => Some(ws.add_map_assessed("map", &map_doc(p)?, Some("space"))?),
        None => None,
    };
    let s = ws.space("space")?;
    let hausdorff = s.is_hausdorff();
    let r_space = s.is_r_space();

    let mut t = String::new();
    writeln!(t, "topology: valid, {} points, {} open sets", s.len(), s.opens().len()).unwrap();
    writeln!(t, "points: {}", s.names().join(" ")).unwrap();
    writeln!(t, "regular opens ({}):", s.regular_opens().len()).unwrap();
    for r in s.regular_opens() {
        writeln!(t, "  {r}").unwrap();
    }
    for (label, v) in [("Hausdorff", &hausdorff), ("R-space", &r_space)] {
        match &v.witness {
            None => writeln!(t, "{label}: {}", v.holds).unwrap(),
            Some(w) => writeln!(t, "{label}: {}, witness {w}", v.holds).unwrap(),
        }
    }
    if let Some(f) = &f {
        writeln!(t, "{}", status_line(f)).unwrap();
    }

    let report = json!({
        "points": s.len(),
        "names": s.names(),
        "opens": s.opens(),
        "regular_opens": s.regular_opens(),
        "hausdorff": hausdorff,
        "r_space": r_space,
        "map": f.as_ref().map(|f| json!({ "table": f.table(), "status": f.status() })),
    });
    Ok(Rendered {
        table: t,
        json: to_json(&report),
        ok: true,
    })
}

fn certificate_text(c: &Certificate) -> String {
    match c {
        Certificate::CoverCycle { preperiod, period } => {
            format!("cover cycle, preperiod {preperiod}, period {period}")
        }
        Certificate::EmptyInvariantFamily => "no invariant sets, zero by convention".into(),
        Certificate::GeometricGrowth { ratio } => format!("constant row sum {ratio}, N_m = k·{ratio}^(m-1)"),
        Certificate::None => "none, value is an estimate".into(),
    }
}

fn sequence_table(t: &mut String, r: &EntropyReport) {
    writeln!(t, "{:>4}  {:>24}  {:>12}  {:>12}", "m", "N_m", "a_m", "a_m/m").unwrap();
    for (i, (n, a)) in r.counts.iter().zip(&r.a_seq).enumerate() {
        let m = i + 1;
        writeln!(t, "{m:>4}  {n:>24}  {a:>12.6}  {:>12.6}", a / m as f64).unwrap();
    }
    writeln!(t, "fekete_inf: {:.6} {}", r.fekete_inf, r.log_base.unit()).unwrap();
}

fn value_lines(t: &mut String, r: &EntropyReport) {
    if let Some(c) = r.cycle {
        writeln!(
            t,
            "cycle: ({}, {}), detected at m = {}",
            c.preperiod,
            c.period,
            c.preperiod + c.period
        )
        .unwrap();
    }
    writeln!(t, "certificate: {}", certificate_text(&r.certificate)).unwrap();
    let exact = if r.exact { "exact" } else { "estimate" };
    writeln!(t, "value: {} {} ({exact})", r.value, r.log_base.unit()).unwrap();
}

pub struct EntropyArgs<'a> {
    pub cover: Option<&'a Path>,
    pub k: Option<&'a str>,
    pub sup: bool,
    pub mmax: usize,
    pub base: LogBase,
}

pub fn entropy(space: &Path, map: &Path, args: EntropyArgs<'_>) -> Result<Rendered, CliError> {
    let mut ws = Workspace::new(WorkspaceConfig {
        base: args.base,
        ..WorkspaceConfig::default()
    });
    load_space(&mut ws, "space", space)?;
    let f = ws.add_map("map", &map_doc(map)?, Some("space"))?;
    let s = ws.space("space")?.clone();
    let u = match args.cover {
        Some(p) => {
            let doc: CoverDoc = parse_doc(&p.display().to_string(), &read(p)?)?;
            ws.add_cover("cover", &doc, Some("space"))?
        }
        None => finest_regular_cover(&s),
    };
    let k = match args.k {
        Some(text) => parse_set_literal(text, s.len())?,
        None => s.full(),
    };
    let opts = EntropyOptions {
        m_max: args.mmax.max(1),
        base: args.base,
    };
    let report = entropy_rel_cover(&f, &u, k, opts)?;

    let mut t = String::new();
    writeln!(t, "cover: {} member(s), K = {k}", u.len()).unwrap();
    sequence_table(&mut t, &report);
    value_lines(&mut t, &report);

    let sup = if args.sup {
        let h = invariant_sets(&f)?;
        let r = entropy_sup_invariant(&f, &h, opts)?;
        writeln!(
            t,
            "sup over {} invariant set(s): {} {} (attained at K = {})",
            h.len(),
            r.value,
            r.log_base.unit(),
            r.target.map(|k| k.to_string()).unwrap_or_else(|| "none".into())
        )
        .unwrap();
        Some(r)
    } else {
        None
    };

    let json = to_json(&json!({
        "cover": u.members(),
        "report": report,
        "sup": sup,
    }));
    Ok(Rendered { table: t, json, ok: true })
}

pub fn sft(path: &Path, mmax: usize, base: LogBase) -> Result<Rendered, CliError> {
    let mut ws = Workspace::new(WorkspaceConfig::default());
    let doc: SftDoc = parse_doc(&path.display().to_string(), &read(path)?)?;
    let sft = ws.add_sft("sft", &doc)?;
    let report = sft_entropy(&sft, mmax.max(2), base);
    let oracle = base.from_nats(spectral_entropy(&sft)?);
    let gap = report.fekete_inf - oracle;

    let mut t = String::new();
    writeln!(t, "shift: {}, {} symbol(s) after pruning", sft.description, sft.alphabet()).unwrap();
    sequence_table(&mut t, &report);
    value_lines(&mut t, &report);
    writeln!(t, "spectral oracle: {oracle:.9} {}", base.unit()).unwrap();
    writeln!(t, "gap fekete_inf - oracle: {gap:.6}").unwrap();

    let json = to_json(&json!({
        "symbols": sft.symbols,
        "report": report,
        "spectral": oracle,
        "gap": gap,
    }));
    Ok(Rendered { table: t, json, ok: true })
}

pub fn product(spaces: [&Path; 2], maps: [&Path; 2], mmax: usize, base: LogBase) -> Result<Rendered, CliError> {
    let mut ws = Workspace::new(WorkspaceConfig {
        base,
        ..WorkspaceConfig::default()
    });
    load_space(&mut ws, "space1", spaces[0])?;
    load_space(&mut ws, "space2", spaces[1])?;
    let f = ws.add_map("map1", &map_doc(maps[0])?, Some("space1"))?;
    let h = ws.add_map("map2", &map_doc(maps[1])?, Some("space2"))?;
    let p = product_space_with_limits(ws.space("space1")?, ws.space("space2")?, ws.config.limits)?;
    let fh = p.product_map(&f, &h)?;
    let opts = EntropyOptions { m_max: mmax.max(1), base };

    let mut t = String::new();
    writeln!(t, "product: {} points, {} open sets", p.space.len(), p.space.opens().len()).unwrap();
    writeln!(t, "{}", status_line(&fh)).unwrap();
    if !fh.is_r_map() {
        let json = to_json(&json!({ "points": p.space.len(), "map": fh.table(), "status": fh.status() }));
        return Ok(Rendered { table: t, json, ok: false });
    }

    let whole = [&fh, &f, &h].map(|g| entropy_whole_space(g, opts));
    let [e_fh, e_f, e_h] = whole;
    let (e_fh, e_f, e_h) = (e_fh?, e_f?, e_h?);
    let n_holds = e_fh.value <= e_f.value + e_h.value + LOG_SLACK;
    writeln!(
        t,
        "Ent_n(f×h) = {} ≤ Ent_n(f) + Ent_n(h) = {} + {}: {n_holds}",
        e_fh.value, e_f.value, e_h.value
    )
    .unwrap();

    // the supremum form needs the invariant families; skip it past the cap
    let sup = |g: &RMap| -> Result<EntropyReport, regent::Error> {
        entropy_sup_invariant(g, &invariant_sets(g)?, opts)
    };
    let big = match (sup(&fh), sup(&f), sup(&h)) {
        (Ok(a), Ok(b), Ok(c)) => {
            let holds = a.value <= b.value + c.value + LOG_SLACK;
            writeln!(
                t,
                "Ent_N(f×h) = {} ≤ Ent_N(f) + Ent_N(h) = {} + {}: {holds}",
                a.value, b.value, c.value
            )
            .unwrap();
            Some((a, b, c, holds))
        }
        (a, b, c) => {
            let e = [a.err(), b.err(), c.err()].into_iter().flatten().next().unwrap();
            writeln!(t, "Ent_N: skipped, {e}").unwrap();
            None
        }
    };
    writeln!(
        t,
        "hypotheses: factors Hausdorff {} / {}, product R-space {}",
        p.left.is_hausdorff().holds,
        p.right.is_hausdorff().holds,
        p.space.is_r_space().holds
    )
    .unwrap();

    let ok = n_holds && big.as_ref().is_none_or(|b| b.3);
    let json = to_json(&json!({
        "points": p.space.len(),
        "map": fh.table(),
        "ent_n": { "product": e_fh, "left": e_f, "right": e_h, "holds": n_holds },
        "ent_big_n": big.map(|(a, b, c, holds)| json!({ "product": a, "left": b, "right": c, "holds": holds })),
    }));
    Ok(Rendered { table: t, json, ok })
}

fn suite_table(r: &SuiteReport) -> String {
    let mut t = String::new();
    writeln!(
        t,
        "{:<18} {:>8} {:>6} {:>10} {:>6} {:>6}  statement",
        "id", "section", "tried", "applicable", "passed", "failed"
    )
    .unwrap();
    for s in &r.statements {
        writeln!(
            t,
            "{:<18} {:>8} {:>6} {:>10} {:>6} {:>6}  {}",
            s.id,
            s.section,
            s.tried,
            s.applicable,
            s.passed,
            s.failures.len(),
            s.title
        )
        .unwrap();
    }
    for s in r.statements.iter().filter(|s| !s.failures.is_empty()) {
        for f in &s.failures {
            writeln!(t, "FAIL {} #{}: {}", s.id, f.index, serde_json::to_string(&f.instance).unwrap()).unwrap();
            for m in &f.messages {
                writeln!(t, "    {m}").unwrap();
            }
        }
    }
    let verdict = if r.all_passed { "all checks passed" } else { "verification failures" };
    writeln!(t, "seed {}: {} ({} failing instance(s))", r.config.seed, verdict, r.total_failures).unwrap();
    t
}

pub fn verify(config: Option<&Path>, seed: Option<u64>) -> Result<Rendered, CliError> {
    let mut cfg: SuiteConfig = match config {
        Some(p) => parse_doc(&p.display().to_string(), &read(p)?)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_suite(&cfg);
    Ok(Rendered {
        table: suite_table(&report),
        json: to_json(&report),
        ok: report.all_passed,
    })
}
