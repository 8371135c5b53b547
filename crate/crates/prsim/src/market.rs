//! Journals, quartile rankings, the dynamic thresholds derived from them,
//! author targeting, and per-journal acceptance.

use rand::Rng;
use thiserror::Error;

use crate::quality::ManuscriptId;
use crate::rng::Stream;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JournalId(pub u32);

impl JournalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for JournalId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "j{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarketError {
    #[error("journal {0} has published nothing; rankings need at least one article per journal")]
    EmptyHistory(JournalId),
}

/// A ranked outlet accepting a fixed number of articles per issue.
#[derive(Debug, Clone)]
pub struct Journal {
    pub id: JournalId,
    pub capacity: u32,
    issues: Vec<Vec<Real>>,
    quality_sum: f64,
    published: u64,
}

impl Journal {
    pub fn new(id: JournalId, capacity: u32) -> Self {
        Self { id, capacity, issues: Vec::new(), quality_sum: 0.0, published: 0 }
    }

    /// Append one issue's accepted true qualities (possibly empty).
    pub fn record_issue(&mut self, qualities: Vec<Real>) {
        assert!(qualities.len() <= self.capacity as usize, "issue exceeds capacity");
        self.quality_sum += qualities.iter().sum::<f64>();
        self.published += qualities.len() as u64;
        self.issues.push(qualities);
    }

    pub fn issues(&self) -> &[Vec<Real>] {
        &self.issues
    }

    pub fn published_count(&self) -> u64 {
        self.published
    }

    /// Mean true quality over everything the journal has ever published.
    pub fn cumulative_avg_quality(&self) -> Option<Real> {
        if self.published == 0 {
            None
        } else {
            Some(self.quality_sum / self.published as f64)
        }
    }

    /// Recompute the average from the full history (invariant check).
    pub fn recomputed_avg_quality(&self) -> Option<Real> {
        let count: usize = self.issues.iter().map(|i| i.len()).sum();
        if count == 0 {
            return None;
        }
        let sum: f64 = self.issues.iter().flatten().sum();
        Some(sum / count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quartile {
    pub const ALL: [Quartile; 4] = [Quartile::Q1, Quartile::Q2, Quartile::Q3, Quartile::Q4];

    pub fn index(self) -> usize {
        match self {
            Quartile::Q1 => 0,
            Quartile::Q2 => 1,
            Quartile::Q3 => 2,
            Quartile::Q4 => 3,
        }
    }
}

impl std::fmt::Display for Quartile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Q{}", self.index() + 1)
    }
}

/// Quartile cut values: the average article quality of the lowest-ranked
/// journal in Q1..Q3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub theta1: Real,
    pub theta2: Real,
    pub theta3: Real,
}

impl Thresholds {
    /// Highest quartile whose threshold the estimate clears; Q4 below θ3.
    pub fn target_quartile(&self, estimate: Real) -> Quartile {
        if estimate >= self.theta1 {
            Quartile::Q1
        } else if estimate >= self.theta2 {
            Quartile::Q2
        } else if estimate >= self.theta3 {
            Quartile::Q3
        } else {
            Quartile::Q4
        }
    }

    pub fn ordered(&self) -> bool {
        self.theta1 >= self.theta2 && self.theta2 >= self.theta3
    }
}

/// Quartile sizes for J journals: top 10%, next to 25%, next to 50%, rest —
/// each boundary rounded up.
pub fn quartile_cuts(journal_count: usize) -> (usize, usize, usize, usize) {
    let j = journal_count;
    let c1 = j.div_ceil(10);
    let c12 = j.div_ceil(4);
    let c123 = j.div_ceil(2);
    (c1, c12 - c1, c123 - c12, j - c123)
}

/// Journal → quartile mapping plus the members of each quartile in rank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuartileAssignment {
    quartile_of: Vec<Quartile>,
    members: [Vec<JournalId>; 4],
    pub cuts: (usize, usize, usize, usize),
}

impl QuartileAssignment {
    fn from_ranked(ranked: &[JournalId]) -> Self {
        let cuts = quartile_cuts(ranked.len());
        let bounds = [cuts.0, cuts.0 + cuts.1, cuts.0 + cuts.1 + cuts.2, ranked.len()];
        let mut quartile_of = vec![Quartile::Q4; ranked.len()];
        let mut members: [Vec<JournalId>; 4] = Default::default();
        for (rank, &id) in ranked.iter().enumerate() {
            let q = match rank {
                r if r < bounds[0] => Quartile::Q1,
                r if r < bounds[1] => Quartile::Q2,
                r if r < bounds[2] => Quartile::Q3,
                _ => Quartile::Q4,
            };
            quartile_of[id.index()] = q;
            members[q.index()].push(id);
        }
        Self { quartile_of, members, cuts }
    }

    /// Bootstrap assignment: contiguous id blocks, lowest ids in Q1.
    pub fn by_id_blocks(journal_count: usize) -> Self {
        let ranked: Vec<JournalId> = (0..journal_count as u32).map(JournalId).collect();
        Self::from_ranked(&ranked)
    }

    pub fn quartile_of(&self, journal: JournalId) -> Quartile {
        self.quartile_of[journal.index()]
    }

    pub fn members(&self, quartile: Quartile) -> &[JournalId] {
        &self.members[quartile.index()]
    }

    pub fn journal_count(&self) -> usize {
        self.quartile_of.len()
    }
}

/// Sort journals by cumulative average quality (descending, ties to the lower
/// id), cut into quartiles, and read the thresholds off the quartile floors.
pub fn update_rankings(journals: &[Journal]) -> Result<(QuartileAssignment, Thresholds), MarketError> {
    let mut avgs = Vec::with_capacity(journals.len());
    for j in journals {
        match j.cumulative_avg_quality() {
            Some(avg) => avgs.push(avg),
            None => return Err(MarketError::EmptyHistory(j.id)),
        }
    }
    let mut ranked: Vec<JournalId> = journals.iter().map(|j| j.id).collect();
    ranked.sort_by(|a, b| {
        avgs[b.index()]
            .total_cmp(&avgs[a.index()])
            .then(a.index().cmp(&b.index()))
    });
    let assignment = QuartileAssignment::from_ranked(&ranked);
    // A quartile can be empty for very small J (Q2 is empty at J = 4); its
    // threshold then inherits the one above, leaving its band unreachable.
    let floor_of = |q: Quartile, above: Real| -> Real {
        match assignment.members(q).last() {
            Some(lowest) => avgs[lowest.index()],
            None => above,
        }
    };
    let theta1 = floor_of(Quartile::Q1, Real::INFINITY);
    let theta2 = floor_of(Quartile::Q2, theta1);
    let theta3 = floor_of(Quartile::Q3, theta2);
    let thresholds = Thresholds { theta1, theta2, theta3 };
    Ok((assignment, thresholds))
}

/// Pick the journal a manuscript is submitted to: uniform among non-excluded
/// journals of the target quartile, falling through to lower quartiles when a
/// quartile offers nothing. `None` means no journal is reachable at all.
pub fn select_target_journal(
    estimate: Real,
    thresholds: &Thresholds,
    assignment: &QuartileAssignment,
    excluded: &[JournalId],
    rng: &mut Stream,
) -> Option<JournalId> {
    let start = thresholds.target_quartile(estimate).index();
    for q in &Quartile::ALL[start..] {
        let candidates: Vec<JournalId> = assignment
            .members(*q)
            .iter()
            .copied()
            .filter(|id| !excluded.contains(id))
            .collect();
        if !candidates.is_empty() {
            return Some(candidates[rng.random_range(0..candidates.len())]);
        }
    }
    None
}

/// One scored submission as the journal sees it at acceptance time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSubmission {
    pub manuscript: ManuscriptId,
    pub score: Real,
    pub true_quality: Real,
}

/// Accept the top-`capacity` submissions by aggregate score (ties to the
/// lower manuscript id) and publish their true qualities as one issue.
/// Returns the accepted and rejected manuscript ids.
pub fn journal_accept(
    journal: &mut Journal,
    submissions: &[ScoredSubmission],
) -> (Vec<ManuscriptId>, Vec<ManuscriptId>) {
    let mut order: Vec<&ScoredSubmission> = submissions.iter().collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.manuscript.cmp(&b.manuscript)));
    let take = (journal.capacity as usize).min(order.len());
    let accepted: Vec<ManuscriptId> = order[..take].iter().map(|s| s.manuscript).collect();
    let rejected: Vec<ManuscriptId> = order[take..].iter().map(|s| s.manuscript).collect();
    journal.record_issue(order[..take].iter().map(|s| s.true_quality).collect());
    (accepted, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{round_stream, Stage};
    use proptest::prelude::*;

    fn journal_with_avg(id: u32, avg: Real) -> Journal {
        let mut j = Journal::new(JournalId(id), 10);
        j.record_issue(vec![avg]);
        j
    }

    #[test]
    fn cuts_for_forty_journals() {
        assert_eq!(quartile_cuts(40), (4, 6, 10, 20));
    }

    #[test]
    fn cuts_for_ten_journals() {
        assert_eq!(quartile_cuts(10), (1, 2, 2, 5));
    }

    #[test]
    fn rankings_for_ten_descending_journals() {
        let journals: Vec<Journal> =
            (0..10).map(|i| journal_with_avg(i, 10.0 - i as f64)).collect();
        let (assignment, thresholds) = update_rankings(&journals).unwrap();
        assert_eq!(assignment.cuts, (1, 2, 2, 5));
        assert_eq!(thresholds.theta1, 10.0);
        assert_eq!(thresholds.theta2, 8.0);
        assert_eq!(thresholds.theta3, 6.0);
        assert_eq!(assignment.quartile_of(JournalId(0)), Quartile::Q1);
        assert_eq!(assignment.quartile_of(JournalId(2)), Quartile::Q2);
        assert_eq!(assignment.quartile_of(JournalId(9)), Quartile::Q4);
    }

    #[test]
    fn boundary_tie_breaks_by_lower_id() {
        // Journals 3 and 1 tie exactly at the Q1/Q2 boundary of J = 10.
        let avgs = [9.0, 8.0, 7.0, 8.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0];
        let journals: Vec<Journal> =
            avgs.iter().enumerate().map(|(i, &a)| journal_with_avg(i as u32, a)).collect();
        let (a1, t1) = update_rankings(&journals).unwrap();
        // Rank order: j0 (9.0), then the 8.0 tie resolves to j1 before j3.
        assert_eq!(a1.members(Quartile::Q1), &[JournalId(0)]);
        assert_eq!(a1.members(Quartile::Q2), &[JournalId(1), JournalId(3)]);
        assert_eq!(t1.theta2, 8.0);
        // Re-running yields the identical assignment.
        let (a2, t2) = update_rankings(&journals).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn rankings_reject_empty_history() {
        let mut journals = vec![journal_with_avg(0, 5.0)];
        journals.push(Journal::new(JournalId(1), 10));
        assert_eq!(update_rankings(&journals).unwrap_err(), MarketError::EmptyHistory(JournalId(1)));
    }

    #[test]
    fn target_quartile_thresholds() {
        let t = Thresholds { theta1: 8.0, theta2: 7.0, theta3: 5.0 };
        assert_eq!(t.target_quartile(9.5), Quartile::Q1);
        assert_eq!(t.target_quartile(7.2), Quartile::Q2);
        assert_eq!(t.target_quartile(5.0), Quartile::Q3);
        assert_eq!(t.target_quartile(3.0), Quartile::Q4);
    }

    #[test]
    fn select_lands_in_target_quartile() {
        let assignment = QuartileAssignment::by_id_blocks(40);
        let t = Thresholds { theta1: 8.0, theta2: 7.0, theta3: 5.0 };
        let mut rng = round_stream(1, 0, Stage::Targeting);
        let chosen = select_target_journal(9.5, &t, &assignment, &[], &mut rng).unwrap();
        assert_eq!(assignment.quartile_of(chosen), Quartile::Q1);
        let chosen = select_target_journal(7.2, &t, &assignment, &[], &mut rng).unwrap();
        assert_eq!(assignment.quartile_of(chosen), Quartile::Q2);
    }

    #[test]
    fn select_falls_through_excluded_quartile() {
        let assignment = QuartileAssignment::by_id_blocks(10); // Q1 = {j0}
        let t = Thresholds { theta1: 8.0, theta2: 7.0, theta3: 5.0 };
        let mut rng = round_stream(2, 0, Stage::Targeting);
        let chosen = select_target_journal(9.0, &t, &assignment, &[JournalId(0)], &mut rng).unwrap();
        assert_eq!(assignment.quartile_of(chosen), Quartile::Q2);
    }

    #[test]
    fn select_exhausts_to_none() {
        let assignment = QuartileAssignment::by_id_blocks(10);
        let t = Thresholds { theta1: 8.0, theta2: 7.0, theta3: 5.0 };
        let all: Vec<JournalId> = (0..10).map(JournalId).collect();
        let mut rng = round_stream(3, 0, Stage::Targeting);
        // Q4 estimate with every Q4 journal excluded: no lower quartile exists.
        let q4_members: Vec<JournalId> = assignment.members(Quartile::Q4).to_vec();
        assert_eq!(select_target_journal(3.0, &t, &assignment, &q4_members, &mut rng), None);
        assert_eq!(select_target_journal(9.0, &t, &assignment, &all, &mut rng), None);
    }

    #[test]
    fn accept_takes_top_scores() {
        let mut journal = Journal::new(JournalId(0), 2);
        let submissions: Vec<ScoredSubmission> = [5.0, 9.0, 7.0, 8.0]
            .iter()
            .enumerate()
            .map(|(i, &s)| ScoredSubmission {
                manuscript: ManuscriptId(i as u64),
                score: s,
                true_quality: s,
            })
            .collect();
        let (accepted, rejected) = journal_accept(&mut journal, &submissions);
        assert_eq!(accepted, vec![ManuscriptId(1), ManuscriptId(3)]);
        assert_eq!(rejected, vec![ManuscriptId(2), ManuscriptId(0)]);
        assert_eq!(journal.issues()[0], vec![9.0, 8.0]);
    }

    #[test]
    fn accept_under_capacity_takes_all() {
        let mut journal = Journal::new(JournalId(0), 5);
        let submissions: Vec<ScoredSubmission> = (0..3)
            .map(|i| ScoredSubmission {
                manuscript: ManuscriptId(i),
                score: i as f64,
                true_quality: i as f64,
            })
            .collect();
        let (accepted, rejected) = journal_accept(&mut journal, &submissions);
        assert_eq!(accepted.len(), 3);
        assert!(rejected.is_empty());
    }

    #[test]
    fn accept_ties_break_by_lower_manuscript_id() {
        let mut journal = Journal::new(JournalId(0), 1);
        let submissions = vec![
            ScoredSubmission { manuscript: ManuscriptId(9), score: 5.0, true_quality: 5.0 },
            ScoredSubmission { manuscript: ManuscriptId(2), score: 5.0, true_quality: 5.0 },
        ];
        let (accepted, _) = journal_accept(&mut journal, &submissions);
        assert_eq!(accepted, vec![ManuscriptId(2)]);
    }

    #[test]
    fn cumulative_average_matches_recompute() {
        let mut journal = Journal::new(JournalId(0), 4);
        journal.record_issue(vec![4.0, 6.0]);
        journal.record_issue(vec![5.0]);
        journal.record_issue(vec![]);
        let a = journal.cumulative_avg_quality().unwrap();
        let b = journal.recomputed_avg_quality().unwrap();
        assert!((a - b).abs() < 1e-9);
        assert_eq!(journal.published_count(), 3);
    }

    proptest! {
        #[test]
        fn cuts_partition_everything(j in 1usize..500) {
            let (c1, c2, c3, c4) = quartile_cuts(j);
            prop_assert_eq!(c1 + c2 + c3 + c4, j);
            prop_assert_eq!(c1, j.div_ceil(10));
            prop_assert_eq!(c1 + c2, j.div_ceil(4));
            prop_assert_eq!(c1 + c2 + c3, j.div_ceil(2));
            let assignment = QuartileAssignment::by_id_blocks(j);
            let total: usize = Quartile::ALL.iter().map(|&q| assignment.members(q).len()).sum();
            prop_assert_eq!(total, j);
        }

        #[test]
        fn thresholds_ordered_after_update(avgs in proptest::collection::vec(0.0f64..12.0, 4..120)) {
            let journals: Vec<Journal> = avgs
                .iter()
                .enumerate()
                .map(|(i, &a)| journal_with_avg(i as u32, a))
                .collect();
            let (_, t) = update_rankings(&journals).unwrap();
            prop_assert!(t.ordered(), "thresholds out of order: {:?}", t);
        }

        #[test]
        fn no_rejected_submission_outranks_an_accepted_one(
            scores in proptest::collection::vec(0.0f64..10.0, 1..60),
            capacity in 1u32..20,
        ) {
            let mut journal = Journal::new(JournalId(0), capacity);
            let submissions: Vec<ScoredSubmission> = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| ScoredSubmission {
                    manuscript: ManuscriptId(i as u64),
                    score: s,
                    true_quality: s,
                })
                .collect();
            let (accepted, rejected) = journal_accept(&mut journal, &submissions);
            prop_assert_eq!(accepted.len(), (capacity as usize).min(scores.len()));
            let score_of = |id: ManuscriptId| scores[id.0 as usize];
            if let Some(min_accepted) =
                accepted.iter().map(|&id| score_of(id)).min_by(f64::total_cmp)
            {
                for &r in &rejected {
                    prop_assert!(score_of(r) <= min_accepted);
                }
            }
        }
    }
}
