//! Multi-sequentiality of weighted automata over groups.

pub mod btp;
pub mod budget;
pub mod corpus;
pub mod cra;
pub mod decompose;
pub mod determinize;
pub mod error;
pub mod format;
pub mod group;
pub mod lipschitz;
pub mod wa;

pub use btp::{
    check_btp, check_btp_integers, check_btp_transducer, degree_of_sequentiality, find_diff_cycle, BtpCounterexample,
    BtpResult, CexRun, CexSegment, Degree,
};
pub use budget::Budget;
pub use cra::{
    compute_alive, cra_eval, cra_to_kseq, kseq_to_cra, positivize, residual_bound, CostRegisterAutomaton, CraBuilder,
    CraTransition, Positivized, RegisterId,
};
pub use decompose::{decompose_k, n_threshold, split_run_loops, split_state, RunLoops, SplitWitness};
pub use determinize::{
    dw_explore, dw_explore_from, dw_initial, dw_step, sequentialize_btp1, valuedness, DwFragment, DwFrontierEdge,
    DwTransition, SubsetState,
};
pub use error::{Error, Result};
pub use format::{automaton_to_dot, cra_to_dot, parse_automaton, parse_cra, render_automaton, render_cra};
pub use group::{word_dist, FreeWord, GroupContext, GroupElement, GroupError, GroupKind, Symbol};
pub use lipschitz::{falsify_lipschitz, find_lip_violation, relation_up_to, verify_lip_witness, LipWitness, Margin};
pub use wa::{
    equiv_up_to, first_disagreement, words_up_to, AutomatonBuilder, PowerAutomaton, PowerEdge, PowerGraph, Run,
    StateId, Transition, WeightedAutomaton, Word,
};
