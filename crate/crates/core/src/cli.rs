//! Command-line front end. Results go to stdout as CSV; failures print one
//! machine-readable line to stderr and map to exit code 1 (invalid input) or 2
//! (size cap exceeded, infeasible belief).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    belief_consistent_baseline, best_response_scan, check_strategy_proofness_peer_eval, collusion_candidates,
    default_truthful_predictions, enumerate_direct_reports, enumerate_prediction_reports, properness_check,
    threshold_check, Belief, CollusionBaseline, CollusionOpportunity, ReportSpace, SizeCap, StrategyProofness,
};
use crate::config::{AgentId, MechanismConfig, MechanismKind};
use crate::error::{Error, Result};
use crate::io::{load_document, load_experiment_spec, ShareDocument};
use crate::mechanisms::{compute_shares, PeerEvaluation, PeerPrediction};
use crate::rational::Rational;
use crate::report::{DirectReport, PredictionReport, Profile, StrategyProfile};
use crate::scoring::Distribution;
use crate::sim::run_experiment;

const DEFAULT_PRECISION: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "peershare", version, about = "Exact reward sharing by peer evaluation and peer prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a report document without computing shares.
    Validate { file: PathBuf },
    /// Compute every agent's share for a report document.
    Share {
        file: PathBuf,
        /// Digits after the decimal point in decimal columns.
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: usize,
    },
    /// Exhaustive incentive analyses.
    Scan {
        #[command(subcommand)]
        scan: Scan,
    },
    /// List every valid report for one agent.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long = "M")]
        cap: u32,
        #[arg(long, value_enum)]
        kind: ReportKind,
        /// Print only the number of reports.
        #[arg(long)]
        count: bool,
    },
    /// Run a seeded simulation and write per-run rows as CSV.
    Simulate {
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores); output does not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportKind {
    Direct,
    Prediction,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineKind {
    /// The liar knows the other reports in the profile.
    Point,
    /// Scored events follow the liar's own truthful predictions.
    Consistent,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "M")]
    cap: Option<u32>,
    /// Reward to share; defaults to n·M.
    #[arg(long = "V")]
    reward: Option<Rational>,
    #[arg(long)]
    alpha: Option<Rational>,
    /// Require every histogram bin to be occupied.
    #[arg(long)]
    strict_counts: bool,
}

impl ConfigArgs {
    fn build(&self, kind: MechanismKind) -> Result<MechanismConfig> {
        let missing = |flag: &str| Error::Parse(format!("missing --{flag}"));
        let n = self.n.ok_or_else(|| missing("n"))?;
        let cap = self.cap.ok_or_else(|| missing("M"))?;
        let reward = self.reward.clone().unwrap_or_else(|| Rational::from(n) * Rational::from(cap));
        let config = MechanismConfig {
            n,
            reward,
            cap,
            alpha: self.alpha.clone(),
            strict_counts: self.strict_counts,
        };
        config.validate(kind)?;
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
enum Scan {
    /// Check that no agent can change its own peer-evaluation share.
    Strategyproof {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Best responses against the other reports in a document, or (with
    /// --q) expected-score maximizers versus nearest feasible forecasts.
    Bestresponse {
        #[arg(long, conflicts_with = "q")]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        agent: AgentId,
        /// Event belief as comma-separated probabilities over bins 0..=M.
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<Rational>>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Inflating deviations and their joint gains.
    Collusion {
        /// Truthful reports; defaults to built-in truthful predictions.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, value_enum)]
        baseline: Option<BaselineKind>,
        #[arg(long)]
        liar: Option<AgentId>,
        #[arg(long)]
        beneficiary: Option<AgentId>,
        /// Also list deviations that are not profitable.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Collusion resistance of peer prediction for several score weights.
    Threshold {
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<Rational>,
        /// Truthful predictions; defaults to built-in ones.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

/// Runs the CLI with process stdout/stderr and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`cli_main`] with explicit output streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Validate { file } => {
            let doc = load_document(file)?;
            writeln!(
                out,
                "valid {} n={} V={} M={}",
                doc.mechanism, doc.config.n, doc.config.reward, doc.config.cap
            )?;
            Ok(())
        }
        Command::Share { file, precision } => share(&load_document(file)?, precision, out),
        Command::Scan { scan } => {
            let cap = SizeCap::from_env()?;
            match scan {
                Scan::Strategyproof { config } => strategyproof(&config.build(MechanismKind::PeerEvaluation)?, cap, out),
                Scan::Bestresponse { profile, agent, q, config } => match (profile, q) {
                    (Some(path), _) => best_response(&load_document(path)?, agent, cap, out),
                    (None, Some(q)) => properness(&config.build(MechanismKind::PeerPrediction)?, q, cap, out),
                    (None, None) => Err(Error::Parse("bestresponse needs --profile or --q".into())),
                },
                Scan::Collusion { profile, baseline, liar, beneficiary, all, config } => {
                    let filter = move |l: AgentId, b: AgentId| {
                        liar.is_none_or(|x| x == l) && beneficiary.is_none_or(|x| x == b)
                    };
                    let request = CollusionRequest { baseline, filter: &filter, all, cap };
                    match profile {
                        Some(path) => request.run_document(&load_document(path)?, out),
                        None => {
                            let config = config.build(MechanismKind::PeerPrediction)?;
                            let truthful = default_truthful_predictions(&config)?;
                            let doc = ShareDocument::new(config, Profile::Prediction(truthful))?;
                            request.run_document(&doc, out)
                        }
                    }
                }
                Scan::Threshold { alphas, profile, config } => {
                    let truthful = match profile {
                        Some(path) => match load_document(path)?.profile {
                            Profile::Prediction(p) => Some(p),
                            Profile::Direct(_) => {
                                return Err(Error::ReportKindMismatch { agent: 1, expected: "histogram" })
                            }
                        },
                        None => None,
                    };
                    // alpha is swept, so any placeholder passes validation here
                    let mut base = config.build(MechanismKind::PeerEvaluation)?;
                    base.alpha = Some(Rational::one());
                    base.validate(MechanismKind::PeerPrediction)?;
                    threshold(&base, &alphas, truthful.as_ref(), cap, out)
                }
            }
        }
        Command::Enumerate { n, cap, kind, count } => {
            let size_cap = SizeCap::from_env()?;
            let (header, rows): (Vec<String>, Vec<Vec<u32>>) = match kind {
                ReportKind::Direct => (
                    (1..n).map(|k| format!("slot{k}")).collect(),
                    enumerate_direct_reports(n, cap, size_cap)?,
                ),
                ReportKind::Prediction => (
                    (0..=cap).map(|k| format!("bin{k}")).collect(),
                    enumerate_prediction_reports(n, cap, size_cap)?,
                ),
            };
            if count {
                writeln!(out, "{}", rows.len())?;
                return Ok(());
            }
            let mut w = csv_writer(out);
            w.write_record(&header)?;
            for row in rows {
                w.write_record(row.iter().map(u32::to_string))?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Simulate { spec, seed, out: path, workers, precision } => {
            let mut spec = load_experiment_spec(spec)?;
            spec.world.seed = seed;
            let report = run_experiment(&spec, workers)?;
            let mut file = BufWriter::new(File::create(path)?);
            report.write_csv(&mut file, precision)?;
            file.flush()?;
            report.write_summary_csv(out, precision)
        }
    }
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out)
}

fn share(doc: &ShareDocument, precision: usize, out: &mut dyn Write) -> Result<()> {
    let result = compute_shares(&doc.config, &doc.profile)?;
    let mut w = csv_writer(out);
    w.write_record(["agent", "grade", "score", "share", "share_decimal"])?;
    for agent in doc.config.agents() {
        let score = result.scores.get(agent - 1).map(ToString::to_string).unwrap_or_default();
        let share = result.share(agent);
        w.write_record([
            agent.to_string(),
            result.grades[agent - 1].to_string(),
            score,
            share.to_string(),
            share.to_decimal_string(precision),
        ])?;
    }
    for (label, value) in [("total", &result.total), ("surplus", &result.surplus)] {
        w.write_record([label, "", "", &value.to_string(), &value.to_decimal_string(precision)])?;
    }
    w.flush()?;
    Ok(())
}

fn strategyproof(config: &MechanismConfig, cap: SizeCap, out: &mut dyn Write) -> Result<()> {
    let outcome = check_strategy_proofness_peer_eval(config, cap)?;
    let mut w = csv_writer(out);
    w.write_record(["n", "V", "M", "holds", "profiles", "replacements", "agent", "profile", "replacement", "before", "after"])?;
    let head = [config.n.to_string(), config.reward.to_string(), config.cap.to_string()];
    match outcome {
        StrategyProofness::Holds { profiles, replacements } => {
            w.write_record(head.iter().cloned().chain([
                "true".into(),
                profiles.to_string(),
                replacements.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]))?;
        }
        StrategyProofness::Violated(witness) => {
            w.write_record(head.iter().cloned().chain([
                "false".into(),
                String::new(),
                String::new(),
                witness.agent.to_string(),
                profile_text(&witness.profile),
                witness.replacement.text(),
                witness.before.to_string(),
                witness.after.to_string(),
            ]))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn best_response(doc: &ShareDocument, agent: AgentId, cap: SizeCap, out: &mut dyn Write) -> Result<()> {
    fn emit<M: ReportSpace>(
        mech: &M,
        profile: &StrategyProfile<M::Report>,
        agent: AgentId,
        cap: SizeCap,
        out: &mut dyn Write,
    ) -> Result<()>
    where
        M::Report: ReportText,
    {
        if agent == 0 || agent > profile.n() {
            return Err(Error::Parse(format!("agent {agent} out of range 1..={}", profile.n())));
        }
        let belief = Belief::from_profile(profile, agent);
        let best = best_response_scan(mech, agent, &belief, cap)?;
        let truthful = profile.report(agent);
        let mut w = csv_writer(out);
        w.write_record(["agent", "report", "expected_share", "is_submitted", "evaluated"])?;
        for r in &best.reports {
            w.write_record([
                agent.to_string(),
                r.text(),
                best.value.to_string(),
                (r == truthful).to_string(),
                best.evaluated.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
    match &doc.profile {
        Profile::Direct(p) => emit(&PeerEvaluation::new(doc.config.clone())?, p, agent, cap, out),
        Profile::Prediction(p) => emit(&PeerPrediction::new(doc.config.clone())?, p, agent, cap, out),
    }
}

fn properness(config: &MechanismConfig, q: Vec<Rational>, cap: SizeCap, out: &mut dyn Write) -> Result<()> {
    let q = Distribution::new(q)?;
    let result = properness_check(config, &q, cap)?;
    let mut w = csv_writer(out);
    w.write_record(["set", "histogram", "best_expected_score", "holds"])?;
    for (set, hists) in [("argmax", &result.argmax), ("nearest", &result.nearest)] {
        for h in hists {
            w.write_record([
                set.to_string(),
                histogram_text(h),
                result.best_expected_score.to_string(),
                result.holds.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

struct CollusionRequest<'a> {
    baseline: Option<BaselineKind>,
    filter: &'a (dyn Fn(AgentId, AgentId) -> bool + Sync),
    all: bool,
    cap: SizeCap,
}

impl CollusionRequest<'_> {
    fn run_document(&self, doc: &ShareDocument, out: &mut dyn Write) -> Result<()> {
        match &doc.profile {
            Profile::Direct(p) => {
                if matches!(self.baseline, Some(BaselineKind::Consistent)) {
                    return Err(Error::InvalidBelief("consistent baseline needs predictions".into()));
                }
                let mech = PeerEvaluation::new(doc.config.clone())?;
                let found = collusion_candidates(&mech, &CollusionBaseline::Profile(p.clone()), Some(self.filter), self.cap)?;
                self.emit(&found, out)
            }
            Profile::Prediction(p) => {
                let mech = PeerPrediction::new(doc.config.clone())?;
                let baseline = match self.baseline.unwrap_or(BaselineKind::Consistent) {
                    BaselineKind::Point => CollusionBaseline::Profile(p.clone()),
                    BaselineKind::Consistent => CollusionBaseline::Beliefs {
                        truthful: p.clone(),
                        beliefs: doc
                            .config
                            .agents()
                            .map(|a| belief_consistent_baseline(&mech, p, a))
                            .collect::<Result<Vec<_>>>()?,
                    },
                };
                let found = collusion_candidates(&mech, &baseline, Some(self.filter), self.cap)?;
                self.emit(&found, out)
            }
        }
    }

    fn emit<R: ReportText>(&self, found: &[CollusionOpportunity<R>], out: &mut dyn Write) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record([
            "liar",
            "beneficiary",
            "deviation",
            "liar_delta",
            "beneficiary_delta",
            "joint_gain",
            "window_lo",
            "window_hi",
        ])?;
        for c in found.iter().filter(|c| self.all || c.is_profitable()) {
            let (lo, hi) = c
                .side_payment_window
                .as_ref()
                .map(|(lo, hi)| (lo.to_string(), hi.to_string()))
                .unwrap_or_default();
            w.write_record([
                c.liar.to_string(),
                c.beneficiary.to_string(),
                c.deviation.text(),
                c.liar_delta.to_string(),
                c.beneficiary_delta.to_string(),
                c.joint_gain.to_string(),
                lo,
                hi,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn threshold(
    base: &MechanismConfig,
    alphas: &[Rational],
    truthful: Option<&crate::report::PredictionProfile>,
    cap: SizeCap,
    out: &mut dyn Write,
) -> Result<()> {
    let rows = threshold_check(base, alphas, truthful, cap)?;
    let mut w = csv_writer(out);
    w.write_record([
        "alpha",
        "bound",
        "resistant",
        "worst_joint_gain",
        "worst_liar",
        "worst_beneficiary",
        "worst_deviation",
        "profitable",
        "candidates",
    ])?;
    for row in rows {
        let (gain, liar, ben, dev) = match &row.worst {
            Some(c) => (c.joint_gain.to_string(), c.liar.to_string(), c.beneficiary.to_string(), c.deviation.text()),
            None => Default::default(),
        };
        w.write_record([
            row.alpha.to_string(),
            row.bound.to_string(),
            row.resistance.to_string(),
            gain,
            liar,
            ben,
            dev,
            row.profitable.to_string(),
            row.candidates.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Compact single-cell rendering of a report: `2=1 3=2` or `2=(0,2,0) 3=(1,1,0)`.
trait ReportText: crate::report::Report {
    fn text(&self) -> String;
}

impl ReportText for DirectReport {
    fn text(&self) -> String {
        self.iter().map(|(t, v)| format!("{t}={v}")).collect::<Vec<_>>().join(" ")
    }
}

impl ReportText for PredictionReport {
    fn text(&self) -> String {
        self.iter()
            .map(|(t, h)| format!("{t}={}", histogram_text(h)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn histogram_text(h: &[u32]) -> String {
    let parts: Vec<String> = h.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn profile_text<R: ReportText>(profile: &StrategyProfile<R>) -> String {
    profile
        .reports()
        .iter()
        .map(|r| format!("{}: {}", r.owner(), r.text()))
        .collect::<Vec<_>>()
        .join("; ")
}
