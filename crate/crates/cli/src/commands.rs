use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use errfloor::boundary::{rank_catalog, select_shift_points, BoundaryProbe, Ranking, Selection};
use errfloor::catalog::TsCatalog;
use errfloor::code::{parse_alist, TannerCode};
use errfloor::decoder::{Algorithm, ChannelModel, DecoderConfig};
use errfloor::search::{run_search, SearchParams};
use errfloor::sim::{adapt_density, is_estimate, mc_estimate, ISDensity, IsOptions, NoiseSource, SimRecord};
use errfloor::stats::q_function;

use crate::config::{parse_gamma_map, parse_list, ConfigFile};
use crate::{BoundaryArgs, CliError, Common, ProbeArgs, ReportArgs, SearchArgs, SimulateArgs};

type Res<T = ()> = Result<T, CliError>;

struct Loaded {
    cfg: ConfigFile,
    code: TannerCode,
    code_path: PathBuf,
    decoder: DecoderConfig,
}

fn load_code(path: &Path) -> Res<TannerCode> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_alist(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn setup(common: &Common) -> Res<Loaded> {
    let cfg = ConfigFile::load(common.config.as_deref())?;
    if let Some(t) = cfg.pick(common.threads, "threads")? {
        // A second global init only happens in-process (tests); ignore it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let code_path: PathBuf = cfg
        .pick(common.code.clone(), "code")?
        .ok_or_else(|| CliError::Usage("no code given (--code or 'code =' in the config)".into()))?;
    let code = load_code(&code_path)?;
    let algorithm: Algorithm = cfg.pick_or(common.algorithm.clone(), "algorithm", "bp".to_string())?.parse()?;
    let mut decoder = DecoderConfig { algorithm, ..Default::default() };
    decoder.max_iters = cfg.pick_or(common.iters, "iters", decoder.max_iters)?;
    decoder.llr_clamp = cfg.pick_or(common.clamp, "clamp", decoder.llr_clamp)?;
    decoder.validate()?;
    Ok(Loaded { cfg, code, code_path, decoder })
}

fn probe_settings(cfg: &ConfigFile, p: &ProbeArgs) -> Res<BoundaryProbe> {
    let d = BoundaryProbe::default();
    let probe = BoundaryProbe {
        l_min: cfg.pick_or(p.lmin, "lmin", d.l_min)?,
        l_max: cfg.pick_or(p.lmax, "lmax", d.l_max)?,
        p: cfg.pick_or(p.p, "p", d.p)?,
    };
    probe.validate()?;
    Ok(probe)
}

fn write(path: &Path, text: &str) -> Res {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// FNV-1a of the canonical alist, used to tie result files to one code.
fn code_id(code: &TannerCode) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in code.to_alist().bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn profile(p: &BTreeMap<usize, usize>) -> String {
    p.iter().map(|(d, c)| format!("{d}:{c}")).collect::<Vec<_>>().join(" ")
}

pub fn info(path: &Path) -> Res {
    let code = load_code(path)?;
    println!("code: {}", path.display());
    println!("n={} m={} k={} rate={:.6}", code.n(), code.m(), code.k(), code.rate());
    println!("variable degrees: {}", profile(&code.dv_profile()));
    println!("check degrees: {}", profile(&code.dc_profile()));
    let girth = code.girth();
    println!("girth: {girth}");
    match code.regular_degrees() {
        Some((dv, dc)) => println!("class: regular {{{dv},{dc}}}, n={}", code.n()),
        None => println!("class: irregular, n={}", code.n()),
    }
    if girth.length() == Some(4) {
        eprintln!("warning: the graph has 4-cycles; searches run on de-duplicated trees");
    }
    Ok(())
}

pub fn search(a: &SearchArgs) -> Res {
    let l = setup(&a.common)?;
    let cfg = &l.cfg;
    let d = SearchParams::default();
    let gamma_by_degree = match cfg.pick(a.gamma_by_degree.clone(), "gamma_by_degree")? {
        Some(s) => parse_gamma_map(&s)?,
        None => BTreeMap::new(),
    };
    let params = SearchParams {
        epsilon1: cfg.pick_or(a.epsilon1, "epsilon1", d.epsilon1)?,
        epsilon2: cfg.pick(a.epsilon2, "epsilon2")?,
        gamma: cfg.pick_or(a.gamma, "gamma", d.gamma)?,
        gamma_by_degree,
        eb_no_db: cfg.pick_or(a.ebno, "ebno", d.eb_no_db)?,
        v_num: cfg.pick(a.vnum, "vnum")?,
        tree_depth: cfg.pick_or(a.depth, "depth", d.tree_depth)?,
        degree_cutoff: match cfg.pick(a.degree_cutoff, "degree_cutoff")? {
            Some(0) => None,
            Some(k) => Some(k),
            None => d.degree_cutoff,
        },
    };
    params.validate()?;
    let out: PathBuf = cfg.pick_or(a.out.clone(), "out", PathBuf::from("catalog.txt"))?;

    let mut report = run_search(&l.code, &params, &l.decoder)?;
    report.catalog.set_meta("code", l.code_path.display());
    report.catalog.set_meta("code_id", code_id(&l.code));
    write(&out, &report.catalog.to_text())?;
    write(&out.with_extension("csv"), &report.catalog.to_csv())?;

    println!(
        "decodings: {} (predicted {}, repeated supports skipped {})",
        report.decodings, report.predicted_decodings, report.skipped_duplicates
    );
    println!("mean iterations: {:.3}", report.mean_iterations());
    if report.catalog.is_empty() {
        println!("no events found; increase epsilon1");
        return Ok(());
    }
    println!("{} distinct events", report.catalog.len());
    println!("{:<10} {:>12} {:>10}", "class", "multiplicity", "elementary");
    for c in report.catalog.class_counts() {
        println!("{:<10} {:>12} {:>10}", format!("({},{})", c.a, c.b), c.multiplicity, c.elementary);
    }
    println!("catalog written to {}", out.display());
    Ok(())
}

fn load_catalog(path: &Path, code: &TannerCode) -> Res<TsCatalog> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let cat = TsCatalog::from_text(&text, Some(code)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if cat.n != code.n() {
        return Err(CliError::Data(format!("catalog is for n={}, code has n={}", cat.n, code.n())));
    }
    Ok(cat)
}

fn print_ranking(r: &Ranking) {
    println!("probe Eb/N0 = {} dB, resolution {:.6}", r.eb_no_db, r.probe.resolution());
    println!("{:<10} {:>12} {:>10} {:>10} {:>10}", "class", "multiplicity", "d2_eps", "min_d2", "ts_elem");
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    for c in &r.classes {
        println!(
            "{:<10} {:>12} {:>10} {:>10} {:>10}",
            c.label(),
            c.multiplicity,
            fmt(c.mean_d_e2),
            fmt(c.min_d_e2),
            c.elementary
        );
    }
    if r.unbracketed > 0 {
        println!("{} entries were not bracketed by [l_min, l_max]", r.unbracketed);
    }
}

pub fn boundary(a: &BoundaryArgs) -> Res {
    let l = setup(&a.common)?;
    let probe = probe_settings(&l.cfg, &a.probe)?;
    let ebno = l.cfg.pick_or(a.ebno, "probe_ebno", 4.0)?;
    let out: PathBuf = l.cfg.pick_or(a.out.clone(), "out", PathBuf::from("boundary"))?;
    let mut cat = load_catalog(&a.catalog, &l.code)?;
    if cat.is_empty() {
        return Err(CliError::Data("catalog has no entries".into()));
    }
    let channel = ChannelModel::new(ebno, l.code.rate())?;
    let ranking = rank_catalog(&mut cat, &probe, &l.decoder, &channel, &l.code)?;
    write(&out.join("classes.csv"), &ranking.class_csv())?;
    write(&out.join("entries.csv"), &ranking.entry_csv())?;
    print_ranking(&ranking);
    println!("tables written to {}", out.display());
    Ok(())
}

fn results_header(code: &TannerCode, code_path: &Path, mode: &str, extra: &[(String, String)], wall: f64) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# errfloor results v1");
    let _ = writeln!(h, "# mode={mode}");
    let _ = writeln!(h, "# code={}", code_path.display());
    let _ = writeln!(h, "# code_id={}", code_id(code));
    let _ = writeln!(h, "# n={} m={} rate={}", code.n(), code.m(), code.rate());
    for (k, v) in extra {
        let _ = writeln!(h, "# {k}={v}");
    }
    let _ = writeln!(h, "# wall_time_secs={wall:.3}");
    h
}

pub fn simulate(a: &SimulateArgs) -> Res {
    let mode = a.mode.to_ascii_lowercase();
    if mode != "mc" && mode != "is" {
        return Err(CliError::Usage(format!("--mode must be mc or is, got '{}'", a.mode)));
    }
    let l = setup(&a.common)?;
    let cfg = &l.cfg;
    let snrs = parse_list(&cfg.pick(a.snrs.clone(), "snrs")?.ok_or_else(|| CliError::Usage("no SNR list (--snrs)".into()))?)?;
    if snrs.is_empty() {
        return Err(CliError::Usage("SNR list is empty".into()));
    }
    let trials: u64 = cfg.pick_or(a.trials, "trials", 10_000)?;
    let noise = NoiseSource::new(cfg.pick_or(a.seed, "seed", 1)?);
    let out: PathBuf = cfg.pick_or(a.out.clone(), "out", PathBuf::from("results"))?;
    let code = &l.code;

    let mut records = Vec::new();
    let mut extra: Vec<(String, String)> = vec![
        ("seed".into(), noise.master_seed.to_string()),
        ("decoder".into(), l.decoder.algorithm.to_string()),
        ("max_iters".into(), l.decoder.max_iters.to_string()),
    ];
    let mut wall = 0.0;

    if mode == "mc" {
        for &snr in &snrs {
            let ch = ChannelModel::new(snr, code.rate())?;
            let e = mc_estimate(code, &ch, trials, &l.decoder, &noise)?;
            wall += e.wall_time_secs;
            println!(
                "Eb/N0 {snr} dB: {} errors / {} frames, P_f = {:.4e} (95% [{:.3e}, {:.3e}]), P_b = {:.4e}",
                e.errors, e.trials, e.p_f_hat, e.ci95.0, e.ci95.1, e.p_b_hat
            );
            for ((ca, cb), k) in e.class_tallies() {
                println!("  ({ca},{cb}) x {k}");
            }
            records.push(SimRecord::from_mc(snr, &e));
        }
    } else {
        let cat_path: PathBuf = a.catalog.clone().ok_or_else(|| CliError::Usage("mode is requires --catalog".into()))?;
        let mut cat = load_catalog(&cat_path, code)?;
        if cat.is_empty() {
            return Err(CliError::Usage("catalog has no events; importance sampling needs at least one centre".into()));
        }
        let rule = match (cfg.pick(a.threshold, "threshold")?, cfg.pick(a.cap, "cap")?) {
            (Some(t), None) => Selection::Threshold(t),
            (None, Some(m)) => Selection::Cap(m),
            (None, None) => return Err(CliError::Usage("mode is requires --threshold or --cap".into())),
            (Some(_), Some(_)) => return Err(CliError::Usage("give only one of --threshold and --cap".into())),
        };
        let probe = probe_settings(cfg, &a.probe)?;
        let probe_ebno = cfg.pick_or(a.probe_ebno, "probe_ebno", snrs[0])?;
        let probe_ch = ChannelModel::new(probe_ebno, code.rate())?;
        let ranking = rank_catalog(&mut cat, &probe, &l.decoder, &probe_ch, code)?;
        let picked = select_shift_points(&ranking.entries, rule)?;
        let shift = cfg.pick_or(a.shift, "shift", 1.0)?;
        if let Some(e) = picked.iter().find(|e| shift > e.result.epsilon_star) {
            eprintln!(
                "warning: shift {shift} exceeds the boundary magnitude {:.3} of some centres; the density may over-bias",
                e.result.epsilon_star
            );
        }
        let psi = cfg.pick(a.psi, "psi")?;
        let threshold = match rule {
            Selection::Threshold(t) => t,
            Selection::Cap(_) => picked.iter().map(|e| e.result.d_e2).fold(0.0, f64::max) + 1e-9,
        };
        let dominant = &ranking.classes[0];
        extra.push(("probe_ebno".into(), probe_ebno.to_string()));
        extra.push(("shift".into(), shift.to_string()));
        extra.push(("centres".into(), picked.len().to_string()));
        if let Some(d) = dominant.min_d_e2 {
            extra.push(("dominant_class".into(), dominant.label()));
            extra.push(("dominant_multiplicity".into(), dominant.multiplicity.to_string()));
            extra.push(("dominant_d2".into(), d.to_string()));
        }
        let mut sp = String::from("support,a,b,d2_eps\n");
        for e in &picked {
            let _ = writeln!(sp, "\"{}\",{},{},{:.6}", errfloor::catalog::one_based(&e.pattern), e.class.a, e.class.b, e.result.d_e2);
        }
        write(&out.join("shift_points.csv"), &sp)?;
        println!("{} shift points (probe Eb/N0 {probe_ebno} dB)", picked.len());

        let opts = IsOptions { log_weights: a.log_weights };
        for &snr in &snrs {
            let ch = ChannelModel::new(snr, code.rate())?;
            let mut density = ISDensity::new(picked.iter().map(|e| e.pattern.clone()).collect(), shift, &ch)?;
            density.psi = psi;
            let e = is_estimate(code, &ch, &density, trials, &l.decoder, &noise, opts)?;
            wall += e.wall_time_secs;
            report_is(snr, &e, &density, &out, "is", code.n())?;
            records.push(SimRecord::from_is(snr, &e));
            if a.adapt && !e.new_events.is_empty() {
                let (next, added) = adapt_density(&e, &density, threshold, |p| {
                    errfloor::boundary::probe_boundary(code, p, &probe, &l.decoder, &probe_ch)
                })?;
                println!("  adaptation added {} centres", added.len());
                if !added.is_empty() {
                    let e2 = is_estimate(code, &ch, &next, trials, &l.decoder, &noise, opts)?;
                    wall += e2.wall_time_secs;
                    report_is(snr, &e2, &next, &out, "is-adapt", code.n())?;
                    let mut r = SimRecord::from_is(snr, &e2);
                    r.mode = "is-adapt".into();
                    records.push(r);
                }
            }
        }
    }

    let header = results_header(code, &l.code_path, &mode, &extra, wall);
    let mut csv = header.clone();
    csv.push_str(SimRecord::CSV_HEADER);
    csv.push('\n');
    let mut jsonl = String::new();
    for r in &records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
        jsonl.push_str(&r.json_line());
        jsonl.push('\n');
    }
    write(&out.join(format!("results_{mode}.csv")), &csv)?;
    write(&out.join(format!("results_{mode}.jsonl")), &jsonl)?;
    println!("results written to {}", out.display());

    let overflows: u64 = records.iter().map(|r| r.weight_overflows).sum();
    let total: u64 = records.iter().map(|r| r.trials).sum();
    if overflows > 0 {
        eprintln!("weight overflow diagnostics: {overflows} of {total} trials");
        if overflows == total {
            return Err(CliError::Runtime("every importance weight overflowed".into()));
        }
    }
    Ok(())
}

fn report_is(snr: f64, e: &errfloor::ISEstimate, d: &ISDensity, out: &Path, tag: &str, n: usize) -> Res {
    let (lo, hi) = e.ci95();
    println!(
        "Eb/N0 {snr} dB [{tag}]: L = {} (M = {}, P = {}), hits {}, intended {}, P_f = {:.4e} (95% [{:.3e}, {:.3e}]), P_b = {:.4e}, V = {:.3e}, new events {}",
        e.trials,
        d.m(),
        e.per_center,
        e.hits,
        e.intended_hits,
        e.p_f_hat,
        lo,
        hi,
        e.p_b_hat,
        e.v_hat,
        e.new_events.len()
    );
    println!("  note: a small V does not establish that the estimate has converged");
    let mut cat = e.new_event_catalog(n);
    cat.set_meta("kind", "new-events");
    cat.set_meta("eb_no_db", snr);
    cat.wall_time_secs = e.wall_time_secs;
    write(&out.join(format!("new_events_{tag}_{snr}.txt")), &cat.to_text())?;
    if let Some(log) = &e.weight_log {
        let mut s = String::from("trial,weight\n");
        for (t, w) in log {
            let _ = writeln!(s, "{t},{w:e}");
        }
        write(&out.join(format!("weights_{tag}_{snr}.csv")), &s)?;
    }
    Ok(())
}

struct ResultsFile {
    source: String,
    meta: BTreeMap<String, String>,
    header: String,
    rows: Vec<String>,
}

fn read_results(path: &Path) -> Res<ResultsFile> {
    let text = fs::read_to_string(path)?;
    let mut meta = BTreeMap::new();
    let mut header = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(h) = line.strip_prefix('#') {
            for part in h.split_whitespace() {
                if let Some((k, v)) = part.split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
        } else if header.is_none() {
            header = Some(line.to_string());
        } else if !line.trim().is_empty() {
            rows.push(line.to_string());
        }
    }
    let header = header.ok_or_else(|| CliError::Data(format!("{}: no column header", path.display())))?;
    let source = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(ResultsFile { source, meta, header, rows })
}

pub fn report(a: &ReportArgs) -> Res {
    let mut paths: Vec<PathBuf> = fs::read_dir(&a.dir)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", a.dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            name.starts_with("results_") && name.ends_with(".csv")
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!("no results_*.csv files in {}", a.dir.display())));
    }
    let files: Vec<ResultsFile> = paths.iter().map(|p| read_results(p)).collect::<Res<_>>()?;
    let id = files[0].meta.get("code_id").cloned();
    if let Some(f) = files.iter().find(|f| f.meta.get("code_id") != id.as_ref()) {
        return Err(CliError::Data(format!("{} belongs to a different code than {}", f.source, files[0].source)));
    }
    if let Some(f) = files.iter().find(|f| f.header != files[0].header) {
        return Err(CliError::Data(format!("{} has a different column layout", f.source)));
    }
    let rate: f64 = files[0]
        .meta
        .get("rate")
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| CliError::Data("results header lacks the code rate".into()))?;
    let meta_f = |k: &str| files.iter().find_map(|f| f.meta.get(k).and_then(|v| v.parse::<f64>().ok()));
    let mult = a.proxy_mult.or_else(|| meta_f("dominant_multiplicity"));
    let w = a.proxy_weight.or_else(|| meta_f("dominant_d2"));

    let cols: Vec<&str> = files[0].header.split(',').collect();
    let snr_col = cols.iter().position(|c| *c == "eb_no_db").ok_or_else(|| CliError::Data("no eb_no_db column".into()))?;
    let mut out = String::new();
    if let (Some(m), Some(w)) = (mult, w) {
        let _ = writeln!(out, "# q_proxy = {m}·Q(sqrt(2·{w}·Es/N0))");
    }
    let _ = writeln!(out, "source,{},q_proxy", files[0].header);
    let mut lines = Vec::new();
    for f in &files {
        for row in &f.rows {
            let snr: f64 = row
                .split(',')
                .nth(snr_col)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::Data(format!("{}: bad row '{row}'", f.source)))?;
            let proxy = match (mult, w) {
                (Some(m), Some(w)) => {
                    let es_no = rate * 10f64.powf(snr / 10.0);
                    format!("{:e}", m * q_function((2.0 * w * es_no).sqrt()))
                }
                _ => String::new(),
            };
            lines.push((snr, f.source.clone(), format!("{},{row},{proxy}", f.source)));
        }
    }
    lines.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
    for (_, _, l) in lines {
        out.push_str(&l);
        out.push('\n');
    }
    let path = a.out.clone().unwrap_or_else(|| a.dir.join("merged.csv"));
    write(&path, &out)?;
    println!("merged {} files into {}", files.len(), path.display());
    Ok(())
}
