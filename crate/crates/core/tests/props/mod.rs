//! Randomised property suites, one function per invariant. Each function
//! panics with the failing case on violation.

pub mod channel;
pub mod epdetect;
pub mod harness;
pub mod metaopt;
pub mod modem;
pub mod turbocode;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

/// Cases per property.
pub const CASES: u32 = 1_000;

/// Runs `test` on `cases` deterministic draws from `strategy`.
pub fn check<S, F>(name: &str, cases: u32, strategy: S, test: F)
where
    S: Strategy,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    let mut runner = TestRunner::new_with_rng(config, rng);
    if let Err(e) = runner.run(&strategy, test) {
        panic!("{name}: {e}");
    }
}

pub type Suite = (&'static str, fn());

pub const ALL: &[Suite] = &[
    ("modem: sharp demap recovers the label", modem::demap_round_trip),
    ("modem: QPSK prior marginal is logistic", modem::qpsk_prior_marginal),
    ("modem: Gray neighbours differ in one bit", modem::gray_adjacency),
    ("modem: uniform prior variance is 1/2", modem::uniform_prior_variance),
    ("channel: real embedding is linear and norm preserving", channel::real_embedding),
    ("channel: SNR conversions round-trip", channel::snr_round_trip),
    ("channel: real noise variance is 1/2", channel::noise_variance),
    ("turbo: both trellises terminate", turbocode::termination),
    ("turbo: log-MAP equals exhaustive MAP", turbocode::log_map_is_exhaustive_map),
    ("turbo: FER non-increasing in iterations", turbocode::fer_monotone_in_iterations),
    ("turbo: channel sign symmetry", turbocode::channel_symmetry),
    ("turbo: unit weights reproduce max-log", turbocode::unit_weights_are_max_log),
    ("ep: site precisions stay positive", epdetect::lambda_positive),
    ("ep: extrinsic excludes own prior", epdetect::extrinsic_exclusion),
    ("ep: cavity times site is the marginal", epdetect::product_lemma),
    ("ep: demap grows with information", epdetect::demap_monotone),
    ("ep: matches reference trace at damping 0.2", epdetect::reference_trace),
    ("metaopt: coordinate permutation", metaopt::coordinate_permutation),
    ("metaopt: dropped optimizee gradients", metaopt::dropped_gradient),
    ("metaopt: identical tasks equal one task", metaopt::identical_tasks),
    ("metaopt: trained optimizer descends on sum of squares", metaopt::descent_on_sum_of_squares),
    ("harness: sweeps are reproducible", harness::reproducible),
    ("harness: Wilson intervals cover", harness::wilson_coverage),
    ("harness: BER non-increasing in SNR", harness::monotone_trend),
];
