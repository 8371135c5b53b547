//! The discrete-time round loop: generation, estimation, targeting, review,
//! acceptance, resubmission bookkeeping, and per-issue metrics.

use thiserror::Error;

use crate::actors::{
    assign_referees, estimate_quality, review_manuscript, EstimationParams, RefereePool,
    ReviewParams, DEFAULT_REFEREES_PER_MANUSCRIPT,
};
use crate::market::{
    journal_accept, select_target_journal, update_rankings, Journal, JournalId,
    QuartileAssignment, ScoredSubmission, Thresholds,
};
use crate::quality::{
    generate_manuscripts, CalibrationError, Manuscript, ManuscriptId, ManuscriptState,
    QualityDistribution,
};
use crate::rng::{round_stream, Stage};
use crate::Real;

/// Full parameter set of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of journals J.
    pub journals: u32,
    /// Newly generated manuscripts per round n.
    pub new_per_round: u32,
    /// Articles each journal accepts per issue.
    pub capacity: u32,
    /// Referee pool size R.
    pub referees: u32,
    /// Author estimation noise scale α (0 disables noise).
    pub alpha: Real,
    /// Author estimation noise exponent λ.
    pub lambda: Real,
    /// Review noise scale β (0 disables noise).
    pub beta: Real,
    /// Review noise load exponent γ.
    pub gamma_exp: Real,
    /// Mean latent quality μ.
    pub mean_quality: Real,
    /// Expected count of manuscripts above the calibration threshold, H.
    pub high_quality_count: u32,
    /// High-quality threshold used for calibration and the round-0 θ1.
    pub bootstrap_theta1: Real,
    /// Rejections before a manuscript is abandoned; `None` = unlimited.
    pub max_rejections: Option<u32>,
    /// Rounds (issues) to simulate, T.
    pub rounds: u32,
    pub seed: u64,
    /// Estimation-variance clamp floor.
    pub q_floor: Real,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            journals: 40,
            new_per_round: 2000,
            capacity: 10,
            referees: 200,
            alpha: 1.0,
            lambda: 0.8,
            beta: 0.1,
            gamma_exp: 0.58,
            mean_quality: 4.0,
            high_quality_count: 100,
            bootstrap_theta1: 8.0,
            max_rejections: Some(5),
            rounds: 100,
            seed: 42,
            q_floor: 0.1,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("`{field}` {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("calibration infeasible: {0}")]
    Calibration(#[from] CalibrationError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ValidationError {
    ValidationError::Invalid { field, reason: reason.into() }
}

impl SimConfig {
    /// Validate every invariant and pre-check calibration feasibility.
    /// Returns the calibrated quality distribution on success.
    pub fn validate(&self) -> Result<QualityDistribution<Real>, ValidationError> {
        if self.journals == 0 {
            return Err(invalid("journals", "must be positive"));
        }
        if self.new_per_round == 0 {
            return Err(invalid("new_per_round", "must be positive"));
        }
        if self.capacity == 0 {
            return Err(invalid("capacity", "must be positive"));
        }
        if (self.referees as usize) < DEFAULT_REFEREES_PER_MANUSCRIPT {
            return Err(invalid(
                "referees",
                format!("must be at least {DEFAULT_REFEREES_PER_MANUSCRIPT}"),
            ));
        }
        if self.rounds == 0 {
            return Err(invalid("rounds", "must be positive"));
        }
        if self.high_quality_count == 0 {
            return Err(invalid("high_quality_count", "must be positive"));
        }
        if let Some(m) = self.max_rejections {
            if m == 0 {
                return Err(invalid("max_rejections", "must be positive (or unlimited)"));
            }
        }
        if !(self.mean_quality.is_finite() && self.mean_quality > 0.0) {
            return Err(invalid("mean_quality", "must be positive and finite"));
        }
        if !(self.bootstrap_theta1.is_finite() && self.bootstrap_theta1 > self.mean_quality) {
            return Err(invalid("bootstrap_theta1", "must exceed mean_quality"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(invalid("alpha", "must be non-negative"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid("lambda", "must be non-negative"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(invalid("beta", "must be non-negative"));
        }
        if !(self.gamma_exp.is_finite() && self.gamma_exp > 0.0) {
            return Err(invalid("gamma", "must be positive"));
        }
        if !(self.q_floor.is_finite() && self.q_floor > 0.0) {
            return Err(invalid("q_floor", "must be positive"));
        }
        let dist = QualityDistribution::calibrate(
            self.mean_quality,
            self.high_quality_count,
            self.new_per_round,
            self.bootstrap_theta1,
        )?;
        Ok(dist)
    }

    pub fn estimation_params(&self) -> EstimationParams<Real> {
        EstimationParams::new(self.alpha, self.lambda, self.q_floor)
    }

    pub fn review_params(&self) -> ReviewParams<Real> {
        ReviewParams::new(self.beta, self.gamma_exp, DEFAULT_REFEREES_PER_MANUSCRIPT)
    }
}

/// Per-issue aggregates, one record per round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub issue: u32,
    /// Mean true quality of the articles published this issue by the
    /// journals of Q1..Q4 (assignment in effect during the round); 0 when a
    /// quartile published nothing.
    pub quartile_avg: [Real; 4],
    /// N = new manuscripts plus carried-over resubmissions.
    pub total_submissions: u64,
    pub accepted: u64,
    pub abandoned: u64,
    /// Cumulative histogram of rejections endured before acceptance.
    pub rejection_histogram: Vec<u64>,
}

/// Per-journal trace of one round, for oracle tests.
#[derive(Debug, Clone)]
pub struct JournalRoundDetail {
    pub journal: JournalId,
    pub submissions: Vec<ScoredSubmission>,
    pub accepted: Vec<ManuscriptId>,
}

#[derive(Debug, Clone)]
pub struct RoundDetail {
    pub journals: Vec<JournalRoundDetail>,
}

/// Mutable world state of one simulation run.
#[derive(Debug, Clone)]
pub struct SimState {
    pub config: SimConfig,
    pub dist: QualityDistribution<Real>,
    pub journals: Vec<Journal>,
    pub thresholds: Thresholds,
    pub assignment: QuartileAssignment,
    pub pool: RefereePool,
    /// Carried-over manuscripts awaiting resubmission, ascending by id.
    pub in_flight: Vec<Manuscript>,
    pub round: u32,
    next_manuscript_id: u64,
    pub generated_total: u64,
    pub accepted_total: u64,
    pub abandoned_total: u64,
    /// Index = rejections endured before acceptance.
    pub acceptance_histogram: Vec<u64>,
}

/// Set up round 0: calibrate the generator and preset thresholds from its
/// quantiles (θ1 from config, θ2 at the 75th percentile, θ3 at the median),
/// with quartile membership assigned by journal-id blocks. Data-driven
/// rankings take over once every journal has published.
pub fn bootstrap(config: &SimConfig) -> Result<SimState, ValidationError> {
    let dist = config.validate()?;
    let theta2 = dist.quantile(0.75);
    let theta3 = dist.quantile(0.5);
    // Guard the ordering invariant for extreme calibrations where the
    // configured θ1 sits below the 75th percentile.
    let theta1 = config.bootstrap_theta1;
    let theta2 = theta2.min(theta1);
    let theta3 = theta3.min(theta2);
    let journals = (0..config.journals)
        .map(|i| Journal::new(JournalId(i), config.capacity))
        .collect();
    Ok(SimState {
        dist,
        journals,
        thresholds: Thresholds { theta1, theta2, theta3 },
        assignment: QuartileAssignment::by_id_blocks(config.journals as usize),
        pool: RefereePool::new(config.referees as usize),
        in_flight: Vec::new(),
        round: 0,
        next_manuscript_id: 0,
        generated_total: 0,
        accepted_total: 0,
        abandoned_total: 0,
        acceptance_histogram: Vec::new(),
        config: config.clone(),
    })
}

impl SimState {
    pub fn in_flight_count(&self) -> u64 {
        self.in_flight.len() as u64
    }

    fn bump_histogram(&mut self, rejections: u32) {
        let idx = rejections as usize;
        if self.acceptance_histogram.len() <= idx {
            self.acceptance_histogram.resize(idx + 1, 0);
        }
        self.acceptance_histogram[idx] += 1;
    }
}

pub fn run_round(state: &mut SimState) -> RoundMetrics {
    run_round_detailed(state).0
}

/// One synchronous publication round. Stage order: reset referee loads,
/// generate, pool with carry-overs, estimate, target, assign referees,
/// review, accept per journal, process rejections, update rankings, emit
/// metrics.
pub fn run_round_detailed(state: &mut SimState) -> (RoundMetrics, RoundDetail) {
    let config = state.config.clone();
    let round = state.round;
    let est_params = config.estimation_params();
    let rev_params = config.review_params();

    // (1) Referee loads count the current round only.
    state.pool.reset();

    // (2) Fresh manuscripts.
    let mut gen_rng = round_stream(config.seed, round, Stage::Generation);
    let new = generate_manuscripts(
        &state.dist,
        config.new_per_round,
        round,
        &mut state.next_manuscript_id,
        &mut gen_rng,
    );
    state.generated_total += new.len() as u64;

    // (3) Pool with carried-over rejections; ascending id keeps processing
    // order deterministic (carry-overs hold strictly smaller ids).
    let mut active: Vec<Manuscript> = std::mem::take(&mut state.in_flight);
    active.extend(new);
    let total_submissions = active.len() as u64;

    // (4) Fresh author estimate, then a target journal, for every manuscript.
    let mut est_rng = round_stream(config.seed, round, Stage::Estimation);
    for m in active.iter_mut() {
        m.author_estimate = estimate_quality(m.true_quality, &est_params, &mut est_rng);
    }
    let mut target_rng = round_stream(config.seed, round, Stage::Targeting);
    let mut abandoned_this_round = 0u64;
    let mut submitting: Vec<usize> = Vec::with_capacity(active.len());
    let mut targets: Vec<JournalId> = Vec::with_capacity(active.len());
    for (idx, m) in active.iter_mut().enumerate() {
        match select_target_journal(
            m.author_estimate,
            &state.thresholds,
            &state.assignment,
            &m.rejected_by,
            &mut target_rng,
        ) {
            Some(journal) => {
                m.state = ManuscriptState::UnderReview;
                submitting.push(idx);
                targets.push(journal);
            }
            None => {
                // Every reachable journal has already rejected it.
                m.state = ManuscriptState::Abandoned;
                abandoned_this_round += 1;
            }
        }
    }

    // (5) Referee assignment for all submissions, then reviews against the
    // final per-round loads.
    let mut assign_rng = round_stream(config.seed, round, Stage::Assignment);
    let panels = assign_referees(
        &mut state.pool,
        submitting.len(),
        rev_params.referees_per_manuscript,
        &mut assign_rng,
    )
    .expect("pool size validated");
    let mut review_rng = round_stream(config.seed, round, Stage::Review);
    let mut per_journal: Vec<Vec<ScoredSubmission>> =
        vec![Vec::new(); config.journals as usize];
    for (slot, &idx) in submitting.iter().enumerate() {
        let m = &active[idx];
        let (r1, r2) = (panels[slot][0], panels[slot][1]);
        let scores = review_manuscript(
            m.true_quality,
            (r1, r2),
            (state.pool.load(r1), state.pool.load(r2)),
            &rev_params,
            &mut review_rng,
        );
        per_journal[targets[slot].index()].push(ScoredSubmission {
            manuscript: m.id,
            score: scores.aggregate,
            true_quality: m.true_quality,
        });
    }

    // (6) Acceptance, journal by journal in id order.
    let mut accepted_this_round = 0u64;
    let mut detail = RoundDetail { journals: Vec::with_capacity(config.journals as usize) };
    let mut published_by_quartile: [Vec<Real>; 4] = Default::default();
    for (j_idx, submissions) in per_journal.iter().enumerate() {
        let journal_id = JournalId(j_idx as u32);
        let quartile = state.assignment.quartile_of(journal_id);
        let (accepted, rejected) = journal_accept(&mut state.journals[j_idx], submissions);
        for &ms_id in &accepted {
            let idx = active
                .binary_search_by_key(&ms_id, |m| m.id)
                .expect("accepted id present");
            let m = &mut active[idx];
            m.state = ManuscriptState::Accepted;
            m.accepted_by = Some(journal_id);
            state.bump_histogram(m.rejection_count);
            published_by_quartile[quartile.index()].push(m.true_quality);
            accepted_this_round += 1;
        }
        // (7) Rejections: record the journal, abandon past the limit,
        // otherwise carry to the next round.
        for &ms_id in &rejected {
            let idx = active
                .binary_search_by_key(&ms_id, |m| m.id)
                .expect("rejected id present");
            let m = &mut active[idx];
            m.rejection_count += 1;
            m.rejected_by.push(journal_id);
            debug_assert_eq!(m.rejection_count as usize, m.rejected_by.len());
            if config.max_rejections.is_some_and(|max| m.rejection_count >= max) {
                m.state = ManuscriptState::Abandoned;
                abandoned_this_round += 1;
            } else {
                m.state = ManuscriptState::Pending;
            }
        }
        detail.journals.push(JournalRoundDetail {
            journal: journal_id,
            submissions: submissions.clone(),
            accepted,
        });
    }
    state.accepted_total += accepted_this_round;
    state.abandoned_total += abandoned_this_round;

    // Carry pending manuscripts forward, preserving id order.
    state.in_flight =
        active.into_iter().filter(|m| m.state == ManuscriptState::Pending).collect();

    // Conservation must hold at every round boundary.
    assert_eq!(
        state.generated_total,
        state.accepted_total + state.abandoned_total + state.in_flight_count(),
        "conservation violated at round {round}"
    );

    // (8) Rankings for the next round, once every journal has history.
    if state.journals.iter().all(|j| j.published_count() > 0) {
        let (assignment, thresholds) =
            update_rankings(&state.journals).expect("all journals published");
        state.assignment = assignment;
        state.thresholds = thresholds;
    }

    // (9) Metrics under the assignment the round was played with.
    let quartile_avg = std::array::from_fn(|q| {
        let qs = &published_by_quartile[q];
        if qs.is_empty() {
            0.0
        } else {
            qs.iter().sum::<Real>() / qs.len() as Real
        }
    });
    let metrics = RoundMetrics {
        issue: round,
        quartile_avg,
        total_submissions,
        accepted: accepted_this_round,
        abandoned: abandoned_this_round,
        rejection_histogram: state.acceptance_histogram.clone(),
    };
    state.round += 1;
    (metrics, detail)
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub metrics: Vec<RoundMetrics>,
    pub state: SimState,
}

/// Bootstrap, then run the configured number of rounds. Deterministic in
/// `(config, seed)`.
pub fn run_simulation(config: &SimConfig) -> Result<SimulationOutput, ValidationError> {
    let mut state = bootstrap(config)?;
    let mut metrics = Vec::with_capacity(config.rounds as usize);
    for _ in 0..config.rounds {
        metrics.push(run_round(&mut state));
    }
    Ok(SimulationOutput { metrics, state })
}

/// Rejections-before-acceptance distribution of a finished run; abandoned
/// manuscripts are counted separately.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionStats {
    pub histogram: Vec<u64>,
    pub abandoned: u64,
}

impl RejectionStats {
    pub fn total_accepted(&self) -> u64 {
        self.histogram.iter().sum()
    }

    pub fn mean_rejections(&self) -> Real {
        let total = self.total_accepted();
        if total == 0 {
            return 0.0;
        }
        let weighted: u64 =
            self.histogram.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
        weighted as Real / total as Real
    }

    pub fn first_time_accept_rate(&self) -> Real {
        let total = self.total_accepted();
        if total == 0 {
            return 0.0;
        }
        self.histogram.first().copied().unwrap_or(0) as Real / total as Real
    }
}

pub fn collect_rejection_stats(state: &SimState) -> RejectionStats {
    RejectionStats {
        histogram: state.acceptance_histogram.clone(),
        abandoned: state.abandoned_total,
    }
}
