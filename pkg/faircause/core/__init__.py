"""Domain types shared by all modules: variables, graphs and run tables."""
from .graph import (  # noqa: F401
    CausalGraph, build_graph, common_ancestors, graph_from_dict, is_cause, load_graph,
    topological_order,
)
from .observations import (  # noqa: F401
    ObservationMatrix, load_run_table, run_table_text, write_run_table,
)
from .queries import AteQuery  # noqa: F401
from .variables import (  # noqa: F401
    Objective, SignSpec, Tier, VariableKind, VariableSpec, load_study, study_to_dict,
)
