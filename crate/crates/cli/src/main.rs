mod manifest;
mod render;
mod suite;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wpvol_core::identities::intersection_numbers;
use wpvol_core::laplace::{laplace_transform, w_transform};
use wpvol_core::{is_stable, keys_up_to, Error, VolumeKey, VolumeTable};

use manifest::Manifest;
use suite::{Options, Suite};

#[derive(Parser)]
#[command(name = "wpvol", version, about = "Exact Weil-Petersson and super volume polynomials")]
struct Cli {
    /// Volume cache file.
    #[arg(long, global = true, env = "WPVOL_CACHE", default_value = "wpvol-cache.json")]
    cache_path: PathBuf,
    /// Skip reading and writing the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableKind {
    Volumes,
    Intersections,
    Laplace,
}

#[derive(Subcommand)]
enum Command {
    /// Print one volume polynomial.
    Compute {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: usize,
        /// Super volume instead of the ordinary one.
        #[arg(long = "super")]
        sup: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run verification suites over every key with 3g-3+n <= max-dim.
    Check {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        max_dim: u32,
        /// Relative tolerance of the numeric suite.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Emit a table of volumes, intersection numbers or transforms.
    Table {
        #[arg(long, value_enum)]
        kind: TableKind,
        #[arg(long, default_value_t = 0)]
        min_dim: u32,
        #[arg(long, default_value_t = 2)]
        max_dim: u32,
        #[arg(long = "super")]
        sup: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the Laplace transform F (or W with --w) of one volume.
    Laplace {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: usize,
        #[arg(long = "super")]
        sup: bool,
        /// Signed mixed derivative W instead of F.
        #[arg(long)]
        w: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Engine(e.into())
    }
}

fn open_table(cli: &Cli) -> Result<VolumeTable, Failure> {
    if cli.no_cache {
        return Ok(VolumeTable::new());
    }
    match VolumeTable::with_cache(&cli.cache_path) {
        Ok(t) => Ok(t),
        Err(e @ (Error::Cache(_) | Error::Invariant { .. } | Error::Parse(_))) => {
            eprintln!("warning: discarding unreadable cache ({e})");
            std::fs::remove_file(&cli.cache_path).map_err(Error::from)?;
            Ok(VolumeTable::with_cache(&cli.cache_path)?)
        }
        Err(e) => Err(e.into()),
    }
}

fn stable_key(g: u32, n: usize, sup: bool) -> Result<VolumeKey, Failure> {
    if !is_stable(g, n) {
        return Err(Failure::Usage(Error::Unstable { g, n }.to_string()));
    }
    Ok(VolumeKey { g, n, sup })
}

fn print_manifest(m: &Manifest, format: Format) -> Result<(), Failure> {
    let line = serde_json::to_string(m)?;
    match format {
        Format::Text => println!("# manifest: {line}"),
        Format::Latex => println!("% manifest: {line}"),
        Format::Json => {}
    }
    Ok(())
}

fn keys_in(min_dim: u32, max_dim: u32) -> Vec<(u32, usize)> {
    keys_up_to(max_dim)
        .into_iter()
        .filter(|&(g, n)| 3 * g as usize + n >= 3 + min_dim as usize)
        .collect()
}

fn tau_label(g: u32, alphas: &[u32]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < alphas.len() {
        let a = alphas[i];
        let run = alphas[i..].iter().take_while(|&&b| b == a).count();
        parts.push(if run == 1 {
            format!("tau_{a}")
        } else {
            format!("tau_{a}^{run}")
        });
        i += run;
    }
    format!("<{}>_{g}", parts.join(" "))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let table = open_table(cli)?;
    let ok = match &cli.command {
        Command::Compute { g, n, sup, format } => {
            let key = stable_key(*g, *n, *sup)?;
            let manifest = Manifest::new("compute", &table)?
                .param("g", g)
                .param("n", n)
                .param("super", sup);
            let v = table.ensure(key)?;
            match format {
                Format::Text => println!("{}", render::text(&v)),
                Format::Latex => println!("{}", render::latex(&v)),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "key": key.to_string(),
                        "g": g,
                        "n": n,
                        "super": sup,
                        "text": render::text(&v),
                        "polynomial": v.as_ref(),
                        "manifest": manifest,
                    }))?
                ),
            }
            if *format != Format::Json {
                eprintln!("manifest: {}", serde_json::to_string(&manifest)?);
            }
            true
        }
        Command::Check {
            suite,
            max_dim,
            tol,
            format,
        } => {
            let mut manifest = Manifest::new("check", &table)?
                .param("suite", suite)
                .param("max_dim", max_dim)
                .param("tol", tol);
            let records = suite::run(
                *suite,
                &Options {
                    max_dim: *max_dim,
                    tol: *tol,
                },
                &table,
            )?;
            let count = |f: fn(&wpvol_core::Verdict) -> bool| records.iter().filter(|r| f(&r.verdict)).count();
            let (pass, fail, skipped) = (
                count(|v| v.is_pass()),
                count(|v| v.is_fail()),
                count(|v| v.is_skipped()),
            );
            manifest.result("pass", pass);
            manifest.result("fail", fail);
            manifest.result("skipped", skipped);
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "checks": records, "manifest": manifest }))?
                ),
                _ => {
                    for r in &records {
                        let order = r.order.map(|k| format!(" [K={k}]")).unwrap_or_default();
                        let detail = match &r.verdict {
                            wpvol_core::Verdict::Pass => String::new(),
                            wpvol_core::Verdict::Fail(d) | wpvol_core::Verdict::Skipped(d) => {
                                format!(": {d}")
                            }
                        };
                        println!(
                            "{:<7} {:<10} {:<17} {:<10} {}{order}{detail}",
                            r.verdict.label().to_uppercase(),
                            r.suite,
                            r.check,
                            r.key,
                            r.anchor
                        );
                    }
                    println!("summary: {pass} pass, {fail} fail, {skipped} skipped");
                    print_manifest(&manifest, Format::Text)?;
                }
            }
            fail == 0
        }
        Command::Table {
            kind,
            min_dim,
            max_dim,
            sup,
            format,
        } => {
            let mut manifest = Manifest::new("table", &table)?
                .param("kind", format!("{kind:?}").to_lowercase())
                .param("min_dim", min_dim)
                .param("max_dim", max_dim)
                .param("super", sup);
            let mut entries = Vec::new();
            for (g, n) in keys_in(*min_dim, *max_dim) {
                let key = VolumeKey { g, n, sup: *sup };
                match kind {
                    TableKind::Volumes => {
                        let v = table.ensure(key)?;
                        entries.push(json!({
                            "key": key.to_string(),
                            "text": render::text(&v),
                            "latex": render::latex(&v),
                            "polynomial": v.as_ref(),
                        }));
                    }
                    TableKind::Intersections => {
                        let mut seen = BTreeSet::new();
                        for (idx, value) in intersection_numbers(g, n, &table)? {
                            let mut a = idx.alphas.clone();
                            a.sort_unstable();
                            if seen.insert(a.clone()) {
                                entries.push(json!({
                                    "key": tau_label(g, &a),
                                    "g": g,
                                    "alphas": a,
                                    "text": value.to_string(),
                                    "latex": value.to_string(),
                                }));
                            }
                        }
                    }
                    TableKind::Laplace => {
                        let f = laplace_transform(&*table.ensure(key)?);
                        entries.push(json!({
                            "key": format!("F{}", key.to_string().trim_start_matches('V')),
                            "text": render::laurent_text(&f),
                            "latex": render::laurent_text(&f),
                            "transform": f,
                        }));
                    }
                }
            }
            manifest.result("entries", entries.len());
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "entries": entries, "manifest": manifest }))?
                ),
                _ => {
                    let field = if *format == Format::Latex { "latex" } else { "text" };
                    for e in &entries {
                        println!("{} = {}", e["key"].as_str().unwrap_or(""), e[field].as_str().unwrap_or(""));
                    }
                    print_manifest(&manifest, *format)?;
                }
            }
            true
        }
        Command::Laplace {
            g,
            n,
            sup,
            w,
            format,
        } => {
            let key = stable_key(*g, *n, *sup)?;
            let manifest = Manifest::new("laplace", &table)?
                .param("g", g)
                .param("n", n)
                .param("super", sup)
                .param("w", w);
            let mut f = laplace_transform(&*table.ensure(key)?);
            if *w {
                f = w_transform(&f);
            }
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "key": key.to_string(),
                        "kind": if *w { "W" } else { "F" },
                        "transform": f,
                        "manifest": manifest,
                    }))?
                ),
                _ => {
                    println!("{}", render::laurent_text(&f));
                    eprintln!("manifest: {}", serde_json::to_string(&manifest)?);
                }
            }
            true
        }
    };
    if !cli.no_cache {
        table.save()?;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Engine(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
