//! Turning two-party protocols into streaming algorithms and k-player
//! protocols, and boosting success probability by majority vote.

mod amplify;
mod automaton;
mod kfromtwo;

pub use amplify::{amplify_majority, Amplified, AmplifierPlan};
pub use automaton::{
    det_stream_from_two_party, AutomatonProtocol, AutomatonState, ReconstructingAutomaton, StreamOptions,
    TwoPartyProtocol,
};
pub use kfromtwo::{k_from_two_simulation, KFromTwo, SimulationStats};

use crate::engine::RowClassProtocol;
use crate::error::Result;
use crate::function::FunctionTable;

/// Optimal deterministic two-party protocols for every cut `1..=m` of `f`.
pub fn row_class_protocols(f: &FunctionTable, cap: u64) -> Result<Vec<TwoPartyProtocol>> {
    (1..=f.arity())
        .map(|c| Ok(Box::new(RowClassProtocol::new(f, c, cap)?) as TwoPartyProtocol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{JointDistribution, ProductDistribution};
    use crate::engine::{measure_error, run_protocol, ErrorSource, InputPartition, MeasureOptions};
    use crate::sumequal::{SumDomain, SumEqualFingerprint};

    #[test]
    fn automaton_computes_sum_equal() {
        let f = FunctionTable::sum_equal_mod(4, 3, 0).unwrap();
        let a = det_stream_from_two_party(&f, row_class_protocols(&f, 1 << 20).unwrap(), &StreamOptions::default())
            .unwrap();
        assert_eq!(a.max_message_bits(), 2);
        assert_eq!(a.memory_bits(), 4);
        for x in f.domain().iter() {
            assert_eq!(a.run(&x).unwrap(), f.eval(&x));
        }
    }

    #[test]
    fn automaton_as_protocol() {
        let f = FunctionTable::sum_equal_mod(5, 3, 1).unwrap();
        let a = det_stream_from_two_party(&f, row_class_protocols(&f, 1 << 20).unwrap(), &StreamOptions::default())
            .unwrap();
        let p = AutomatonProtocol::new(&a, 3);
        let part = InputPartition::contiguous(5, &[0, 3]).unwrap();
        let report = measure_error(
            &p,
            &f,
            &part,
            ErrorSource::Exhaustive { seeds_per_input: 1 },
            0,
            &MeasureOptions::default(),
        )
        .unwrap();
        assert_eq!(report.error_estimate, Some(0.0));
        assert!(report.max_message_bits <= a.memory_bits());
    }

    #[test]
    fn k_from_two_refusals() {
        let f = FunctionTable::sum_equal_mod(3, 3, 0).unwrap();
        let joint = JointDistribution::new(vec![3; 3], vec![1.0 / 27.0; 27]).unwrap();
        let pi2 = SumEqualFingerprint::new(SumDomain::Modular { modulus: 3 }, 3, 0, 0.1, 2).unwrap();
        let err = k_from_two_simulation(pi2.clone(), &f, &joint, 0.1, 1 << 20)
            .err()
            .unwrap();
        assert_eq!(err.kind(), "refused");
        let mu = ProductDistribution::uniform(&[3, 3, 3]).unwrap();
        let sim = k_from_two_simulation(pi2, &f, &mu, 0.1, 1 << 20).unwrap();
        let run = run_protocol(&sim, &InputPartition::singletons(3), &[1, 1, 1], 3).unwrap();
        assert_eq!(run.output, 1);
    }
}
