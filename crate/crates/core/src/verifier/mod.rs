//! Machine checks of flatness, tameness, negligibility, strong implication
//! and the annulus conditions.
//!
//! Verdicts are three-valued. `Pass` means every bound was proven by
//! interval arithmetic (or, where a report says so, by the stated sampling
//! contract); `Fail` comes with a concrete point that violates a bound;
//! `Inconclusive` means the budget ran out first.

mod annulus;
mod cover;
mod flat;
mod implication;
mod negligible;

use serde::Serialize;

pub use annulus::{
    check_annulus_condition, chi_cutoff, scale_coherence, AnnulusData, AnnulusDoc, AnnulusReport, CoherenceDraw,
    CoherenceReport, ConditionVariant, NumDoc,
};
pub use cover::{
    annulus_boxes, certify_plateau, verify_bounds, BoundOutcome, BoundRecord, BoundSpec, BoxOptions, BoxRegion, DomeRegion,
    Everywhere, RadialBox, Witness,
};
pub use flat::{check_flat, check_flat_tame_product, check_tame, FlatnessReport, ProductReport, Region, SampleOptions, TamenessReport};
pub use implication::{
    check_strong_directional, check_strong_global, CertificateDoc, DirectionalReport, GlobalReport, ImplicationCertificate,
    ImplicationOptions, ResidualRecord, Scope, TameRecord, Term, TermDoc,
};
pub use negligible::{check_negligible, check_negligible_at, NegligibilityCertificate, NegligibleAttempt, NegligibleOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Fail,
    Inconclusive,
    Pass,
}

impl Verdict {
    /// Meet in the order fail < inconclusive < pass.
    pub fn meet(self, other: Verdict) -> Verdict {
        self.min(other)
    }

    pub fn all(it: impl IntoIterator<Item = Verdict>) -> Verdict {
        it.into_iter().fold(Verdict::Pass, Verdict::meet)
    }

    pub fn label(self, vacuous: bool) -> &'static str {
        match (self, vacuous) {
            (Verdict::Pass, true) => "pass-vacuous",
            (Verdict::Pass, false) => "pass",
            (Verdict::Fail, _) => "fail",
            (Verdict::Inconclusive, _) => "inconclusive",
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meet_is_order_independent() {
        use Verdict::*;
        let all = [Fail, Inconclusive, Pass];
        for a in all {
            for b in all {
                assert_eq!(a.meet(b), b.meet(a));
                for c in all {
                    assert_eq!(a.meet(b).meet(c), a.meet(b.meet(c)));
                }
            }
        }
        assert_eq!(Verdict::all([Pass, Inconclusive, Pass]), Inconclusive);
        assert_eq!(Verdict::all([]), Pass);
        assert_eq!(Pass.label(true), "pass-vacuous");
    }
}
