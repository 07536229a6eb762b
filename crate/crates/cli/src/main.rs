use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Complex;
use serde_json::{json, Value};

use domaingauge::cert::{self, Certificate};
use domaingauge::error::Error;
use domaingauge::opmodel::{assoc_dims, DiagOpSeq, Operator};
use domaingauge::reductions::{phi, psi, psi_k, psi_k_input_from_json, tilde, verify_bireduction};
use domaingauge::seqrep::{DimSeqRep, RealSeqRep};
use domaingauge::spectra::{
    cantor_cf, identity, interleave_distance, lebesgue_cf, mult_op, srt_dist, wiener_average,
    AffineMap,
};

const EXIT_HOLDS: u8 = 0;
const EXIT_FAILS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "domaingauge",
    version,
    about = "Certified equivalence checks for operator domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a relation and print its certificate.
    Eqcheck {
        relation: Relation,
        a: PathBuf,
        b: PathBuf,
        /// Rank threshold for `douglas`.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Apply a reduction map to one input.
    Reduce { map: Map, input: PathBuf },
    /// Band dimensions of an operator.
    Dims { input: PathBuf },
    /// Random self-check of both reduction directions.
    VerifyBireduction {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Numerical tables for Cantor multiplication operators.
    Wonderland {
        table: Table,
        /// Cylinder depth (`lemma44`), product length K (`wiener`), or sequence length (`interleave`).
        #[arg(long)]
        depth: Option<u32>,
        /// Quadrature nodes for `wiener`.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Largest n for `lemma44`; repetitions for `interleave`.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Re-check a certificate.
    Verify { certificate: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Relation {
    Linf,
    E1,
    Esigma,
    Dom,
    Domu,
    Douglas,
}

#[derive(Clone, Copy, ValueEnum)]
enum Map {
    Tilde,
    Phi,
    Psi,
    Psik,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Lemma44,
    Wiener,
    Interleave,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Output {
    Json(Value),
    Text(String),
}

fn read_json(path: &PathBuf) -> Result<Value, Error> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Parse(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn code(holds: bool) -> u8 {
    if holds {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn cert_out(c: Certificate) -> (u8, Output) {
    (code(c.holds()), Output::Json(c.to_json()))
}

fn eqcheck(relation: Relation, a: &Value, b: &Value, tol: f64) -> Result<(u8, Output), Error> {
    Ok(match relation {
        Relation::Linf => {
            cert_out(cert::certify_linf(&RealSeqRep::from_json(a)?, &RealSeqRep::from_json(b)?).1)
        }
        Relation::E1 => {
            cert_out(cert::certify_e1(&RealSeqRep::from_json(a)?, &RealSeqRep::from_json(b)?).1)
        }
        Relation::Esigma => {
            cert_out(cert::certify_esigma(&DimSeqRep::from_json(a)?, &DimSeqRep::from_json(b)?)?.1)
        }
        Relation::Dom => {
            cert_out(cert::certify_edom(&DiagOpSeq::from_json(a)?, &DiagOpSeq::from_json(b)?)?.1)
        }
        Relation::Domu => {
            cert_out(cert::certify_edomu(&Operator::from_json(a)?, &Operator::from_json(b)?)?.1)
        }
        Relation::Douglas => cert_out(
            cert::certify_douglas(
                &cert::matrix_from_json(a)?,
                &cert::matrix_from_json(b)?,
                tol,
            )?
            .1,
        ),
    })
}

fn reduce(map: Map, v: &Value) -> Result<Value, Error> {
    Ok(match map {
        Map::Tilde => tilde(&RealSeqRep::from_json(v)?).to_json(),
        Map::Phi => phi(&DiagOpSeq::from_json(v)?).to_json(),
        Map::Psi => psi(&RealSeqRep::from_json(v)?).to_json(),
        Map::Psik => psi_k(&psi_k_input_from_json(v)?)?.to_json(),
    })
}

fn table(format: Format, header: &[&str], rows: Vec<Vec<f64>>) -> Output {
    match format {
        Format::Csv => {
            let mut s = header.join(",");
            s.push('\n');
            for r in rows {
                s.push_str(
                    &r.iter()
                        .map(|x| format!("{x:.12e}"))
                        .collect::<Vec<_>>()
                        .join(","),
                );
                s.push('\n');
            }
            Output::Text(s)
        }
        Format::Json => Output::Json(Value::Array(
            rows.into_iter()
                .map(|r| {
                    Value::Object(
                        header
                            .iter()
                            .map(|h| h.to_string())
                            .zip(r.into_iter().map(|x| json!(x)))
                            .collect(),
                    )
                })
                .collect(),
        )),
    }
}

fn wonderland(
    which: Table,
    depth: Option<u32>,
    samples: usize,
    trials: Option<usize>,
    seed: u64,
    format: Format,
) -> Result<Output, Error> {
    match which {
        Table::Lemma44 => {
            let d = depth.unwrap_or(8);
            let id = identity(1 << d);
            let rows = (1..=trials.unwrap_or(100))
                .map(|n| {
                    let f = AffineMap {
                        slope: 1.0 / n as f64,
                        intercept: 1.0,
                    };
                    Ok(vec![
                        n as f64,
                        srt_dist(&mult_op(d, f)?, &id)?,
                        1.0 / n as f64,
                    ])
                })
                .collect::<Result<_, Error>>()?;
            Ok(table(format, &["n", "dist", "bound"], rows))
        }
        Table::Wiener => {
            let k = depth.unwrap_or(40);
            let rows = [1e2, 1e3, 1e4]
                .into_iter()
                .map(|t| {
                    Ok(vec![
                        t,
                        wiener_average(|s| cantor_cf(s, k), t, samples)?,
                        wiener_average(lebesgue_cf, t, samples)?,
                        wiener_average(|_| Complex::new(1.0, 0.0), t, samples)?,
                    ])
                })
                .collect::<Result<_, Error>>()?;
            Ok(table(
                format,
                &["t", "cantor", "lebesgue", "point_mass"],
                rows,
            ))
        }
        Table::Interleave => {
            use rand::{Rng, SeedableRng};
            let n = depth.unwrap_or(8) as usize;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let reps = trials.unwrap_or(4);
            let rows = (1..=n)
                .map(|k| {
                    Ok(vec![
                        k as f64,
                        interleave_distance(&a, k, reps)?,
                        2.0 * 0.5f64.powi(k as i32),
                    ])
                })
                .collect::<Result<_, Error>>()?;
            Ok(table(format, &["k", "dist", "envelope"], rows))
        }
    }
}

fn run(cli: Cli) -> Result<(u8, Output), Error> {
    match cli.command {
        Command::Eqcheck {
            relation,
            a,
            b,
            tol,
        } => eqcheck(relation, &read_json(&a)?, &read_json(&b)?, tol),
        Command::Reduce { map, input } => {
            Ok((EXIT_HOLDS, Output::Json(reduce(map, &read_json(&input)?)?)))
        }
        Command::Dims { input } => {
            let op = Operator::from_json(&read_json(&input)?)?;
            Ok((EXIT_HOLDS, Output::Json(assoc_dims(&op)?.to_json())))
        }
        Command::VerifyBireduction { trials, seed } => {
            let report = verify_bireduction(seed, trials)?;
            let status = if report.discrepancies.is_empty() {
                EXIT_HOLDS
            } else {
                EXIT_INVARIANT
            };
            Ok((status, Output::Json(report.to_json())))
        }
        Command::Wonderland {
            table,
            depth,
            samples,
            trials,
            seed,
            format,
        } => Ok((
            EXIT_HOLDS,
            wonderland(table, depth, samples, trials, seed, format)?,
        )),
        Command::Verify { certificate } => {
            let c = Certificate::from_json(&read_json(&certificate)?)?;
            let r = cert::verify(&c)?;
            let out = json!({"relation": c.relation, "verdict": c.verdict, "ok": r.ok, "failures": r.failures});
            Ok((code(r.ok), Output::Json(out)))
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::Representation(_) => "representation",
        Error::UnsupportedTail(_) => "unsupported_tail",
        Error::IndexSchemeMismatch(..) => "index_scheme_mismatch",
        Error::DimensionMismatch(..) => "dimension_mismatch",
        Error::NotInX0 => "not_in_x0",
        Error::UnsupportedInfPattern(_) => "unsupported_inf_pattern",
        Error::UnsupportedSpectrum(_) => "unsupported_spectrum",
        Error::BadArgument(_) => "bad_argument",
        Error::Invariant(_) => "invariant",
    }
}

fn main() -> ExitCode {
    let (status, out) = match run(Cli::parse()) {
        Ok(r) => r,
        Err(e) => {
            let status = if matches!(e, Error::Invariant(_)) {
                EXIT_INVARIANT
            } else {
                EXIT_INPUT
            };
            (
                status,
                Output::Json(json!({"error": {"kind": error_kind(&e), "message": e.to_string()}})),
            )
        }
    };
    let text = match out {
        Output::Json(v) => serde_json::to_string_pretty(&v).expect("JSON values serialize") + "\n",
        Output::Text(s) => s,
    };
    // a closed pipe downstream is not an error of this tool
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    ExitCode::from(status)
}
