"""Editable-state analysis and causally aligned curricula for confounded
sequential decision tasks, evaluated exactly on finite structural causal
models."""

from .diagram import CausalDiagram, GraphError, NodeRole, ValidationReport
from .expr import ExpressionError, parse_expression
from .scm import (
    AnyTask,
    BudgetExceededError,
    Distribution,
    Edit,
    Episode,
    ExogenousVar,
    FiniteDomain,
    FiniteTask,
    Policy,
    ReplaceFunction,
    ReweightExogenous,
    SetConstant,
    SourceTask,
    StructuralFunction,
    TaskBuilder,
    TaskError,
    UnsupportedEvent,
    apply_edits,
    as_task,
    compile_function,
    conditional_expected_reward_node,
    deterministic_policy,
    expected_reward,
    interventional_distribution,
    reachable_input_rows,
    reachable_values,
    sample_episode,
    uniform_policy,
    validate_policy,
    validate_task,
)
from .editability import (
    NotSolubleError,
    RelevanceGraph,
    SolubilityReport,
    SolubleOrder,
    check_soluble,
    expanded_action_set,
    find_edit,
    find_max_edit,
    is_edit,
    is_soluble,
    list_edits,
    relevance_graph,
    soluble_order,
)
from .solve import (
    ActionOverlap,
    EvalReport,
    LearnerConfig,
    OverlapReport,
    evaluate,
    normalized_iqm,
    q_learn,
    rule_overlap,
    solve_optimal,
)
from .curriculum import (
    AlignmentReport,
    CoverageError,
    Curriculum,
    GeneratorHook,
    GENERATORS,
    PairVerdict,
    RunLog,
    RunLogEntry,
    causal_curriculum_learning,
    check_causally_aligned,
    curriculum_learning,
    cycling_assignment_generator,
    find_causal_curriculum,
    spanning_cycle_generator,
    misaligned_fraction,
    shuffled_assignment_generator,
)
from .fixtures import (
    FIXTURES,
    example1_sokoban_chain,
    example2_two_stage,
    load_fixture,
    mini_button_maze,
    mini_colored_sokoban,
)

__version__ = "0.1.0"
