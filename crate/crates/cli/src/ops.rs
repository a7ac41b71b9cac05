//! Command implementations, shared by the binary and the test suites.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use disseg_core::coder::{
    code_narrative, label_sites, write_feature_table, CueLexicon, SiteRecord, TableMeta,
};
use disseg_core::corpus::{emit_annotations, emit_transcript, load_narrative, Narrative};
use disseg_core::eval::{
    aggregate, confusion, cross_validate, human_performance, metrics, render_metric_table,
    AggregateReport, IrScores,
};
use disseg_core::induce::{learn, FeatureSchema, LearnerConfig, TrainingSet};
use disseg_core::segmenter::{
    apply_tree, builtin_fig7_tree, np_condition1, np_condition2, parse_tree_canonical,
    parse_tree_text, read_segmentations, serialize_tree_canonical, serialize_tree_text,
    write_segmentations, DecisionTree, Segmentation,
};
use disseg_core::synth::{generate, SynthConfig, TEST_PHRASE_COUNTS, TRAIN_PHRASE_COUNTS};

use crate::config::{Algorithm, ExperimentConfig, Overrides};
use crate::error::CliError;

/// A loaded experiment: resolved configuration, lexicon, and the train and
/// test narratives.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub lexicon: CueLexicon,
    pub train: Vec<Narrative>,
    pub test: Vec<Narrative>,
}

/// Which narratives a command operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSel {
    Train,
    Test,
    All,
}

impl DataSel {
    pub fn parse(s: &str) -> Result<DataSel, CliError> {
        match s {
            "train" => Ok(DataSel::Train),
            "test" => Ok(DataSel::Test),
            "all" => Ok(DataSel::All),
            other => Err(CliError::config(format!(
                "unknown narrative set '{other}' (expected train, test or all)"
            ))),
        }
    }
}

pub fn load_experiment(path: &Path, overrides: &Overrides) -> Result<Experiment, CliError> {
    let config = ExperimentConfig::load(path, overrides)?;
    let lexicon = match &config.corpus.lexicon {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            CueLexicon::parse(&text)
                .ok_or_else(|| CliError::config(format!("{}: empty lexicon", path.display())))?
        }
        None => CueLexicon::builtin(),
    };
    let mode = config.parse_mode()?;

    let mut train_ids = config.split.train.clone();
    if train_ids.is_empty() {
        // No explicit split: every narrative in the corpus directory that
        // is not named as test data trains.
        let mut stems: Vec<String> = fs::read_dir(&config.corpus.dir)
            .map_err(|e| CliError::config(format!("{}: {e}", config.corpus.dir.display())))?
            .filter_map(|entry| {
                let path = entry.ok()?.path();
                (path.extension()?.to_str()? == "txt")
                    .then(|| path.file_stem()?.to_str().map(|s| s.to_string()))?
            })
            .filter(|stem| !config.split.test.contains(stem))
            .collect();
        stems.sort();
        train_ids = stems;
    }

    let load_set = |ids: &[String]| -> Result<Vec<Narrative>, CliError> {
        ids.iter()
            .map(|id| {
                let transcript = config.corpus.dir.join(format!("{id}.txt"));
                let sidecar = config.corpus.dir.join(format!("{id}.ann"));
                let (narrative, warnings) = load_narrative(&transcript, &sidecar, mode)?;
                for w in warnings {
                    eprintln!("{}: {w}", transcript.display());
                }
                if narrative.id != *id {
                    return Err(CliError::Corpus(format!(
                        "{}: sidecar declares narrative '{}' but the file stem is '{id}'",
                        sidecar.display(),
                        narrative.id
                    )));
                }
                Ok(narrative)
            })
            .collect()
    };

    let train = load_set(&train_ids)?;
    let test = load_set(&config.split.test)?;
    if train.is_empty() && test.is_empty() {
        return Err(CliError::config(format!(
            "no narratives found under {}",
            config.corpus.dir.display()
        )));
    }
    Ok(Experiment {
        config,
        lexicon,
        train,
        test,
    })
}

impl Experiment {
    fn selected(&self, sel: DataSel) -> Vec<&Narrative> {
        match sel {
            DataSel::Train => self.train.iter().collect(),
            DataSel::Test => self.test.iter().collect(),
            DataSel::All => self.train.iter().chain(&self.test).collect(),
        }
    }

    fn code(&self, narratives: &[&Narrative]) -> Result<Vec<SiteRecord>, CliError> {
        let threshold = self.config.coding.threshold;
        let mode = self.config.global_pro_mode()?;
        let mut records = Vec::new();
        for n in narratives {
            records.extend(code_narrative(n, &self.lexicon, threshold, mode)?);
        }
        Ok(records)
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.config.output.dir.join(name)
    }

    fn write_out(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        Ok(path)
    }
}

/// `features`: export the coded feature table.
pub fn cmd_features(
    experiment: &Experiment,
    sel: DataSel,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let narratives = experiment.selected(sel);
    if narratives.is_empty() {
        return Err(CliError::config(
            "no narratives selected for feature export",
        ));
    }
    let records = experiment.code(&narratives)?;
    let meta = TableMeta {
        global_pro_mode: experiment.config.global_pro_mode()?,
        threshold: experiment.config.coding.threshold,
    };
    let mut table = format!("# config digest: {}\n", experiment.config.digest());
    table.push_str(&write_feature_table(&records, &meta));
    let path = match out {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(p, &table)?;
            p.to_path_buf()
        }
        None => experiment.write_out("features.csv", &table)?,
    };
    println!("wrote {} rows to {}", records.len(), path.display());
    Ok(path)
}

fn load_tree_file(path: &Path) -> Result<DecisionTree, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let tree = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        parse_tree_canonical(&text)?
    } else {
        parse_tree_text(&text)?
    };
    Ok(tree)
}

fn segment_with(
    experiment: &Experiment,
    algorithm: &Algorithm,
    narratives: &[&Narrative],
) -> Result<Vec<Segmentation>, CliError> {
    match algorithm {
        Algorithm::Np1 => Ok(narratives.iter().map(|n| np_condition1(n)).collect()),
        Algorithm::Np2 => Ok(narratives
            .iter()
            .map(|n| np_condition2(n, &experiment.lexicon))
            .collect()),
        Algorithm::Fig7 => {
            let tree = builtin_fig7_tree();
            apply_to_each(experiment, &tree, narratives)
        }
        Algorithm::TreeFile(path) => {
            let tree = load_tree_file(path)?;
            apply_to_each(experiment, &tree, narratives)
        }
    }
}

fn apply_to_each(
    experiment: &Experiment,
    tree: &DecisionTree,
    narratives: &[&Narrative],
) -> Result<Vec<Segmentation>, CliError> {
    narratives
        .iter()
        .map(|n| {
            let records = code_narrative(
                n,
                &experiment.lexicon,
                experiment.config.coding.threshold,
                experiment.config.global_pro_mode()?,
            )?;
            Ok(apply_tree(tree, &records)?)
        })
        .collect()
}

fn score_against_gold(
    segmentations: &[Segmentation],
    narratives: &[&Narrative],
    threshold: u32,
) -> Result<AggregateReport, CliError> {
    let mut scores = Vec::new();
    for seg in segmentations {
        let narrative = narratives
            .iter()
            .find(|n| n.id == seg.narrative_id)
            .ok_or_else(|| {
                CliError::config(format!(
                    "segmentation names unknown narrative '{}'",
                    seg.narrative_id
                ))
            })?;
        let gold = label_sites(&narrative.subjects, threshold)?;
        scores.push((seg.narrative_id.clone(), metrics(&confusion(seg, &gold)?)?));
    }
    Ok(aggregate(&scores)?)
}

fn two_rows(label: &str, report: &AggregateReport) -> Vec<(String, IrScores)> {
    vec![
        (label.to_string(), report.mean),
        ("Std. Dev.".to_string(), report.std_dev),
    ]
}

/// `segment`: run the configured algorithm and write boundaries + report.
pub fn cmd_segment(experiment: &Experiment, sel: DataSel) -> Result<(), CliError> {
    let algorithm = Algorithm::parse(&experiment.config.algorithm)?;
    let narratives = experiment.selected(sel);
    if narratives.is_empty() {
        return Err(CliError::config("no narratives selected for segmentation"));
    }
    let segmentations = segment_with(experiment, &algorithm, &narratives)?;

    let header = vec![
        ("algorithm".to_string(), algorithm.label()),
        ("config digest".to_string(), experiment.config.digest()),
    ];
    let seg_text = write_segmentations(&segmentations, &header);
    let file_tag = match &algorithm {
        Algorithm::TreeFile(p) => format!(
            "tree-{}",
            p.file_stem().and_then(|s| s.to_str()).unwrap_or("file")
        ),
        other => other.label(),
    };
    let seg_path = experiment.write_out(&format!("segmentation-{file_tag}.txt"), &seg_text)?;

    let report = score_against_gold(
        &segmentations,
        &narratives,
        experiment.config.coding.threshold,
    )?;
    let rows = two_rows(&algorithm.label(), &report);
    let rendered = report_text(experiment, &render_metric_table("Average", &rows));
    let report_path = match experiment.config.report.format.as_str() {
        "json" => {
            let body = json_line(&SegmentReportJson {
                config_digest: experiment.config.digest(),
                algorithm: algorithm.label(),
                report: &report,
            });
            experiment.write_out(&format!("report-segment-{file_tag}.json"), &body)?
        }
        _ => experiment.write_out(&format!("report-segment-{file_tag}.txt"), &rendered)?,
    };
    print!("{rendered}");
    println!("wrote {}", seg_path.display());
    println!("wrote {}", report_path.display());
    Ok(())
}

#[derive(Serialize)]
struct SegmentReportJson<'a> {
    config_digest: String,
    algorithm: String,
    report: &'a AggregateReport,
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn report_text(experiment: &Experiment, body: &str) -> String {
    format!(
        "config digest: {}\nthreshold: {} | global.pro mode: {}\n\n{}",
        experiment.config.digest(),
        experiment.config.coding.threshold,
        experiment.config.coding.global_pro_mode,
        body
    )
}

fn train_tree(
    experiment: &Experiment,
    learner: &LearnerConfig,
    narratives: &[&Narrative],
) -> Result<DecisionTree, CliError> {
    let records = experiment.code(narratives)?;
    let schema = FeatureSchema::with_lexicon(&experiment.lexicon);
    let training = TrainingSet::new(records, schema)?;
    Ok(learn(&training, learner))
}

fn write_tree(experiment: &Experiment, stem: &str, tree: &DecisionTree) -> Result<(), CliError> {
    experiment.write_out(&format!("{stem}.tree.txt"), &serialize_tree_text(tree))?;
    experiment.write_out(
        &format!("{stem}.tree.json"),
        &serialize_tree_canonical(tree),
    )?;
    Ok(())
}

/// `train`: learn tree(s) on the training split and report on train (and
/// test when present).
pub fn cmd_train(experiment: &Experiment) -> Result<(), CliError> {
    if experiment.train.is_empty() {
        return Err(CliError::config("training split is empty"));
    }
    let train_refs: Vec<&Narrative> = experiment.train.iter().collect();
    let test_refs: Vec<&Narrative> = experiment.test.iter().collect();

    let mut learners = vec![(
        "Learning 1".to_string(),
        experiment.config.learner.to_learner_config()?,
    )];
    if let Some(l2) = &experiment.config.learner2 {
        learners.push(("Learning 2".to_string(), l2.to_learner_config()?));
    }

    let mut body = String::new();
    for (label, learner) in &learners {
        let tree = train_tree(experiment, learner, &train_refs)?;
        let stem = label.to_lowercase().replace(' ', "");
        write_tree(experiment, &stem, &tree)?;

        let train_segs = apply_to_each(experiment, &tree, &train_refs)?;
        let train_report =
            score_against_gold(&train_segs, &train_refs, experiment.config.coding.threshold)?;
        body.push_str(&render_metric_table(
            &format!("{label} on training set"),
            &two_rows(label, &train_report),
        ));
        body.push('\n');
        if !test_refs.is_empty() {
            let test_segs = apply_to_each(experiment, &tree, &test_refs)?;
            let test_report =
                score_against_gold(&test_segs, &test_refs, experiment.config.coding.threshold)?;
            body.push_str(&render_metric_table(
                &format!("{label} on test set"),
                &two_rows(label, &test_report),
            ));
            body.push('\n');
        }
        println!(
            "{label}: {} nodes, wrote {} and .json",
            tree.node_count(),
            experiment.out_path(&format!("{stem}.tree.txt")).display()
        );
    }
    let rendered = report_text(experiment, &body);
    experiment.write_out("report-train.txt", &rendered)?;
    print!("{rendered}");
    Ok(())
}

/// `xval`: grouped cross-validation over the training narratives.
pub fn cmd_xval(experiment: &Experiment, folds: Option<usize>) -> Result<(), CliError> {
    if experiment.train.len() < 2 {
        return Err(CliError::config(
            "cross-validation needs at least 2 training narratives",
        ));
    }
    let k = match folds.or(if experiment.config.xval.folds == 0 {
        None
    } else {
        Some(experiment.config.xval.folds)
    }) {
        Some(k) => k,
        None => experiment.train.len(),
    };
    let learner = experiment.config.learner.to_learner_config()?;
    let cv = cross_validate(
        &experiment.train,
        &experiment.lexicon,
        experiment.config.coding.threshold,
        experiment.config.global_pro_mode()?,
        &learner,
        k,
    )?;
    for fold in &cv.folds {
        write_tree(
            experiment,
            &format!("xval/fold-{:02}", fold.fold),
            &fold.tree,
        )?;
    }
    let mut body = String::new();
    let fold_rows: Vec<(String, IrScores)> = cv
        .folds
        .iter()
        .flat_map(|f| f.scores.iter().cloned())
        .map(|(id, s)| (format!("fold {id}"), s))
        .collect();
    body.push_str(&render_metric_table(
        &format!("Cross-validation ({k} folds)"),
        &fold_rows,
    ));
    body.push('\n');
    body.push_str(&render_metric_table(
        "Average over held-out narratives",
        &two_rows("Learning 1", &cv.report),
    ));
    let rendered = report_text(experiment, &body);
    experiment.write_out("report-xval.txt", &rendered)?;
    print!("{rendered}");
    println!(
        "wrote {} fold trees under {}",
        cv.folds.len(),
        experiment.out_path("xval").display()
    );
    Ok(())
}

/// The machine-readable form of the full experiment report.
#[derive(Serialize)]
pub struct SuiteReport {
    pub config_digest: String,
    pub threshold: u32,
    pub global_pro_mode: String,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub train_sites: usize,
    pub test_sites: usize,
    pub human_train: Option<AggregateReport>,
    pub human_test: Option<AggregateReport>,
    pub condition1_train: AggregateReport,
    pub condition2_train: AggregateReport,
    pub condition1_test: Option<AggregateReport>,
    pub condition2_test: Option<AggregateReport>,
    pub learning_train: Vec<(String, AggregateReport)>,
    pub learning_test: Vec<(String, AggregateReport)>,
    pub xval_folds: usize,
    pub cross_validation: Vec<(String, AggregateReport)>,
}

/// Builds the full report: both hand-tuned conditions on train and test,
/// every configured learner on train and test, cross-validated estimates,
/// and the human baseline when per-subject data is available.
pub fn build_suite_report(experiment: &Experiment) -> Result<SuiteReport, CliError> {
    if experiment.train.is_empty() {
        return Err(CliError::config(
            "the experiment has no training narratives",
        ));
    }
    let threshold = experiment.config.coding.threshold;
    let train_refs: Vec<&Narrative> = experiment.train.iter().collect();
    let test_refs: Vec<&Narrative> = experiment.test.iter().collect();

    let run_rules =
        |narratives: &[&Narrative]| -> Result<(AggregateReport, AggregateReport), CliError> {
            let c1 = segment_with(experiment, &Algorithm::Np1, narratives)?;
            let c2 = segment_with(experiment, &Algorithm::Np2, narratives)?;
            Ok((
                score_against_gold(&c1, narratives, threshold)?,
                score_against_gold(&c2, narratives, threshold)?,
            ))
        };
    let (condition1_train, condition2_train) = run_rules(&train_refs)?;
    let (condition1_test, condition2_test) = if test_refs.is_empty() {
        (None, None)
    } else {
        let (c1, c2) = run_rules(&test_refs)?;
        (Some(c1), Some(c2))
    };

    let mut learners = vec![(
        "Learning 1".to_string(),
        experiment.config.learner.to_learner_config()?,
    )];
    if let Some(l2) = &experiment.config.learner2 {
        learners.push(("Learning 2".to_string(), l2.to_learner_config()?));
    }

    let mut learning_train = Vec::new();
    let mut learning_test = Vec::new();
    let mut cross_validation = Vec::new();
    let k = if experiment.config.xval.folds == 0 {
        experiment.train.len()
    } else {
        experiment.config.xval.folds
    };
    for (label, learner) in &learners {
        let tree = train_tree(experiment, learner, &train_refs)?;
        let segs = apply_to_each(experiment, &tree, &train_refs)?;
        learning_train.push((
            label.clone(),
            score_against_gold(&segs, &train_refs, threshold)?,
        ));
        if !test_refs.is_empty() {
            let segs = apply_to_each(experiment, &tree, &test_refs)?;
            learning_test.push((
                label.clone(),
                score_against_gold(&segs, &test_refs, threshold)?,
            ));
        }
        if experiment.train.len() >= 2 {
            let cv = cross_validate(
                &experiment.train,
                &experiment.lexicon,
                threshold,
                experiment.config.global_pro_mode()?,
                learner,
                k,
            )?;
            cross_validation.push((label.clone(), cv.report));
        }
    }

    let human = |narratives: &[Narrative]| -> Option<AggregateReport> {
        if narratives.is_empty() {
            return None;
        }
        human_performance(narratives, threshold)
            .ok()
            .map(|hp| hp.report)
    };

    Ok(SuiteReport {
        config_digest: experiment.config.digest(),
        threshold,
        global_pro_mode: experiment.config.coding.global_pro_mode.clone(),
        train_ids: experiment.train.iter().map(|n| n.id.clone()).collect(),
        test_ids: experiment.test.iter().map(|n| n.id.clone()).collect(),
        train_sites: experiment.train.iter().map(|n| n.site_count()).sum(),
        test_sites: experiment.test.iter().map(|n| n.site_count()).sum(),
        human_train: human(&experiment.train),
        human_test: human(&experiment.test),
        condition1_train,
        condition2_train,
        condition1_test,
        condition2_test,
        learning_train,
        learning_test,
        xval_folds: if experiment.train.len() >= 2 { k } else { 0 },
        cross_validation,
    })
}

/// Renders the suite report as aligned text tables.
pub fn render_suite_report(report: &SuiteReport) -> String {
    let mut out = String::new();
    out.push_str("disseg experiment report\n");
    out.push_str(&format!("config digest: {}\n", report.config_digest));
    out.push_str(&format!(
        "threshold: {} | global.pro mode: {}\n",
        report.threshold, report.global_pro_mode
    ));
    out.push_str(&format!(
        "train: {} narrative(s), {} sites | test: {} narrative(s), {} sites\n\n",
        report.train_ids.len(),
        report.train_sites,
        report.test_ids.len(),
        report.test_sites
    ));

    if report.human_train.is_some() || report.human_test.is_some() {
        let mut rows = Vec::new();
        if let Some(h) = &report.human_train {
            rows.push(("Training Set".to_string(), h.mean));
        }
        if let Some(h) = &report.human_test {
            rows.push(("Test Set".to_string(), h.mean));
        }
        out.push_str(&render_metric_table("Average human performance", &rows));
        out.push('\n');
    }

    let mut rows = two_rows("Condition 1", &report.condition1_train);
    rows.extend(two_rows("Condition 2", &report.condition2_train));
    out.push_str(&render_metric_table("Hand tuning: training set", &rows));
    out.push('\n');
    if let (Some(c1), Some(c2)) = (&report.condition1_test, &report.condition2_test) {
        let mut rows = two_rows("Condition 1", c1);
        rows.extend(two_rows("Condition 2", c2));
        out.push_str(&render_metric_table("Hand tuning: test set", &rows));
        out.push('\n');
    }

    if !report.learning_train.is_empty() {
        let mut rows = Vec::new();
        for (label, r) in &report.learning_train {
            rows.extend(two_rows(label, r));
        }
        out.push_str(&render_metric_table(
            "Machine learning: training set",
            &rows,
        ));
        out.push('\n');
    }
    if !report.learning_test.is_empty() {
        let mut rows = Vec::new();
        for (label, r) in &report.learning_test {
            rows.extend(two_rows(label, r));
        }
        out.push_str(&render_metric_table("Machine learning: test set", &rows));
        out.push('\n');
    }
    if !report.cross_validation.is_empty() {
        let mut rows = Vec::new();
        for (label, r) in &report.cross_validation {
            rows.extend(two_rows(label, r));
        }
        out.push_str(&render_metric_table(
            &format!(
                "Machine learning: {}-fold cross-validation",
                report.xval_folds
            ),
            &rows,
        ));
        out.push('\n');
    }
    out
}

/// `eval`: score a stored segmentation, report the human baseline, or run
/// the full experiment suite.
pub fn cmd_eval(
    experiment: &Experiment,
    human: bool,
    segmentation: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(path) = segmentation {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let segmentations = read_segmentations(&text)?;
        let narratives: Vec<&Narrative> = experiment.selected(DataSel::All);
        let report = score_against_gold(
            &segmentations,
            &narratives,
            experiment.config.coding.threshold,
        )?;
        let mut rows: Vec<(String, IrScores)> = report.per_narrative.clone();
        rows.extend(two_rows("Average", &report));
        let rendered = report_text(experiment, &render_metric_table("Narrative", &rows));
        experiment.write_out("report-eval.txt", &rendered)?;
        print!("{rendered}");
        return Ok(());
    }

    if human {
        let threshold = experiment.config.coding.threshold;
        let mut rows = Vec::new();
        if !experiment.train.is_empty() {
            let hp = human_performance(&experiment.train, threshold)?;
            rows.push(("Training Set".to_string(), hp.report.mean));
        }
        if !experiment.test.is_empty() {
            let hp = human_performance(&experiment.test, threshold)?;
            rows.push(("Test Set".to_string(), hp.report.mean));
        }
        let rendered = report_text(
            experiment,
            &render_metric_table("Average human performance", &rows),
        );
        experiment.write_out("report-human.txt", &rendered)?;
        print!("{rendered}");
        return Ok(());
    }

    let report = build_suite_report(experiment)?;
    match experiment.config.report.format.as_str() {
        "json" => {
            let body = json_line(&report);
            experiment.write_out("report.json", &body)?;
            print!("{body}");
        }
        _ => {
            let rendered = render_suite_report(&report);
            experiment.write_out("report.txt", &rendered)?;
            print!("{rendered}");
        }
    }
    Ok(())
}

/// Options for `gen-corpus`.
#[derive(Debug, Clone)]
pub struct GenOptions {
    pub out: PathBuf,
    pub seed: u64,
    pub train: usize,
    pub test: usize,
    pub noise: f64,
    pub min_duration: f64,
    pub subjects: u32,
    pub threshold: u32,
}

fn cycle_sizes(base: &[usize], count: usize) -> Vec<usize> {
    (0..count).map(|i| base[i % base.len()]).collect()
}

/// `gen-corpus`: write a synthetic corpus and a ready-to-run experiment
/// configuration.
pub fn cmd_gen_corpus(options: &GenOptions) -> Result<(), CliError> {
    if options.train == 0 {
        return Err(CliError::config("need at least one training narrative"));
    }
    if options.threshold < 1 || options.threshold > options.subjects {
        return Err(CliError::config("threshold must lie in 1..=subjects"));
    }
    let corpus_dir = options.out.join("corpus");
    fs::create_dir_all(&corpus_dir)?;

    let make = |counts: Vec<usize>, start_index: usize| SynthConfig {
        phrase_counts: counts,
        seed: options.seed,
        subject_count: options.subjects,
        threshold: options.threshold,
        min_duration: options.min_duration,
        label_noise: options.noise,
        id_prefix: "gen".into(),
        start_index,
    };
    let train = generate(&make(cycle_sizes(&TRAIN_PHRASE_COUNTS, options.train), 1));
    let test = generate(&make(
        cycle_sizes(&TEST_PHRASE_COUNTS, options.test),
        options.train + 1,
    ));

    for narrative in train.iter().chain(&test) {
        fs::write(
            corpus_dir.join(format!("{}.txt", narrative.id)),
            emit_transcript(narrative),
        )?;
        fs::write(
            corpus_dir.join(format!("{}.ann", narrative.id)),
            emit_annotations(narrative),
        )?;
    }

    let ids = |set: &[Narrative]| {
        set.iter()
            .map(|n| format!("\"{}\"", n.id))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let config = format!(
        "# generated by disseg gen-corpus (seed {seed})\n\
         algorithm = \"np2\"\n\n\
         [corpus]\ndir = \"corpus\"\n\n\
         [split]\ntrain = [{train_ids}]\ntest = [{test_ids}]\n\n\
         [coding]\nthreshold = {threshold}\nglobal_pro_mode = \"static\"\n\n\
         [learner]\nmin_instances = 2\nconfidence_factor = 0.25\n\
         categorical_grouping = \"per_value\"\ngain_restriction = \"gain_ratio_over_average_gain\"\n\n\
         [report]\nformat = \"text\"\n\n\
         [output]\ndir = \"out\"\n",
        seed = options.seed,
        train_ids = ids(&train),
        test_ids = ids(&test),
        threshold = options.threshold,
    );
    fs::write(options.out.join("experiment.toml"), config)?;

    let total_sites: usize = train.iter().chain(&test).map(|n| n.site_count()).sum();
    println!(
        "generated {} training and {} test narratives ({} sites) under {}",
        train.len(),
        test.len(),
        total_sites,
        options.out.display()
    );
    println!(
        "experiment config: {}",
        options.out.join("experiment.toml").display()
    );
    Ok(())
}
