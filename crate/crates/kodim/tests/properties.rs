//! Randomized algebraic laws of the exterior calculus and the structure
//! validator, each checked on well over a hundred instances.
//!
//! The generators and the law bodies live in `support` so the acceptance
//! suite can replay the same checks.

mod support;

use kodim::spec_io::builtin;
use proptest::prelude::*;
use support::*;

const CASES: u32 = 128;

fn check(result: Result<(), String>) -> Result<(), TestCaseError> {
    result.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, ..ProptestConfig::default() })]

    #[test]
    fn d_squares_to_zero((_, form) in manifold_and_form()) {
        check(law_dd_zero(&form))?;
    }

    #[test]
    fn d_satisfies_the_graded_leibniz_rule((left, right) in form_pair()) {
        check(law_graded_leibniz(&left, &right))?;
    }

    #[test]
    fn bidegree_components_shift_as_the_table_says((acs, form) in acs_and_form()) {
        check(law_bidegree_shift_table(&acs, &form))?;
    }

    #[test]
    fn bidegree_operators_sum_to_d((acs, form) in acs_and_form()) {
        check(law_bidegree_sum_is_d(&acs, &form))?;
    }

    #[test]
    fn conjugated_structures_still_square_to_minus_one(
        name in prop::sample::select(vec!["torus4", "nilmanifold_N", "kodaira_thurston"]),
        shears in prop::collection::vec((0usize..4, 0usize..4, rational()), 1..=3),
    ) {
        let (manifold, acs) = builtin::pair(name).unwrap();
        check(law_shear_conjugate_accepted(&manifold, acs.j_matrix(), &shears))?;
    }

    #[test]
    fn perturbed_structures_are_rejected(
        r in 0usize..4,
        c in 0usize..4,
        delta in rational(),
    ) {
        let (manifold, acs) = builtin::pair("torus4").unwrap();
        check(law_perturbation_rejected(&manifold, acs.j_matrix(), r, c, &delta))?;
    }

    #[test]
    fn conjugation_is_an_involution((_, form) in manifold_and_form()) {
        check(law_conjugation_involution(&form))?;
    }

    #[test]
    fn conjugation_distributes_over_wedge((left, right) in form_pair()) {
        check(law_conjugation_distributes_over_wedge(&left, &right))?;
    }
}
