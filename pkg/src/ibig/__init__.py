"""Evidential consultation over competing hypothesis hierarchies.

Belief from uncertain findings is combined per hierarchy with a three-step
approximation of Dempster's rule; the next question is always the node whose
unanswered findings promise the largest change of the current belief
distribution, across all hierarchies at once.
"""

from .belief import (
    BeliefState,
    EvidenceInput,
    NodeMasses,
    belief,
    combine_same_focus,
    compute_belief_state,
    step1_node_masses,
    step2_aggregate_confirming,
    step3_apply_nonconfirming,
)
from .infogain import (
    IncrementTable,
    PotentialMasses,
    build_increment_table,
    potential_masses,
    select_next,
)
from .kb import (
    DataItem,
    EngineConfig,
    EvidenceTarget,
    Frame,
    Hierarchy,
    HierarchyNode,
    KnowledgeBase,
    ValidationReport,
    load,
    load_file,
    save,
    save_file,
    validate,
)
from .oracle import OracleAssignment, oracle_combine, simple_support, vacuous
from .session import Session, run_script, start_session

__version__ = "0.1.0"
