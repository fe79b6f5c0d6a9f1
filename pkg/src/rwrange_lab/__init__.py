"""Monte Carlo laboratory for range-graph observables of lattice walks."""

__version__ = "0.1.0"

from .walks import (
    MAX_DIMENSION,
    MIN_DIMENSION,
    LatticePoint,
    SegmentView,
    WalkPath,
    dump_path,
    load_path,
    reverse_translate,
    simulate_walk,
    stream_generator,
)
from .observables import (
    ObservableKind,
    RangeGraph,
    ResistanceSolveConfig,
    ResistanceSolveError,
    build_range_graph,
    cut_point_count,
    cut_point_count_naive,
    edge_list_text,
    effective_resistance,
    effective_resistance_dense,
    graph_distance,
    graph_distance_dijkstra,
    observable,
    resistance_between,
    resistance_between_dense,
    sample_observable_values,
)
from .decomposition import (
    CROSS_TERM_CSV_COLUMNS,
    CrossTerm,
    DyadicDecomposition,
    cross_term,
    cross_term_tail_samples,
    decomposition_rows,
    dyadic_decompose,
    tail_sample_rows,
    write_cross_term_csv,
)
from .capacity import (
    CAPACITY_CSV_COLUMNS,
    CapacityEstimate,
    canonical_point_array,
    capacity_estimate,
    capacity_radius_sweep,
    set_diameter,
    write_capacity_csv,
)
from .stats import (
    TAIL_CSV_COLUMNS,
    VARIANCE_CSV_COLUMNS,
    VARIANCE_LAWS,
    CltReport,
    GridPoint,
    TailFit,
    VarianceScan,
    clt_diagnostics,
    clt_report,
    default_tail_window,
    fit_tail_exponent,
    jackknife_variance_error,
    report_to_dict,
    report_to_json,
    survival_curve,
    survival_rows,
    tail_scan,
    validate_variance_grid,
    variance_scan,
    variance_scan_from_values,
    variance_scan_rows,
)
from .tables import format_cell, read_csv, schema_header, write_csv
from .cli import (
    ConfigError,
    ExperimentConfig,
    build_parser,
    config_from_dict,
    config_from_json,
    main,
    run,
    run_oracle_check,
    verify_run_directory,
)

__all__ = [
    "__version__",
    "MAX_DIMENSION",
    "MIN_DIMENSION",
    "LatticePoint",
    "SegmentView",
    "WalkPath",
    "dump_path",
    "load_path",
    "reverse_translate",
    "simulate_walk",
    "stream_generator",
    "ObservableKind",
    "RangeGraph",
    "ResistanceSolveConfig",
    "ResistanceSolveError",
    "build_range_graph",
    "cut_point_count",
    "cut_point_count_naive",
    "edge_list_text",
    "effective_resistance",
    "effective_resistance_dense",
    "graph_distance",
    "graph_distance_dijkstra",
    "observable",
    "resistance_between",
    "resistance_between_dense",
    "sample_observable_values",
    "CROSS_TERM_CSV_COLUMNS",
    "CrossTerm",
    "DyadicDecomposition",
    "cross_term",
    "cross_term_tail_samples",
    "decomposition_rows",
    "dyadic_decompose",
    "tail_sample_rows",
    "write_cross_term_csv",
    "CAPACITY_CSV_COLUMNS",
    "CapacityEstimate",
    "canonical_point_array",
    "capacity_estimate",
    "capacity_radius_sweep",
    "set_diameter",
    "write_capacity_csv",
    "TAIL_CSV_COLUMNS",
    "VARIANCE_CSV_COLUMNS",
    "VARIANCE_LAWS",
    "CltReport",
    "GridPoint",
    "TailFit",
    "VarianceScan",
    "clt_diagnostics",
    "clt_report",
    "default_tail_window",
    "fit_tail_exponent",
    "jackknife_variance_error",
    "report_to_dict",
    "report_to_json",
    "survival_curve",
    "survival_rows",
    "tail_scan",
    "validate_variance_grid",
    "variance_scan",
    "variance_scan_from_values",
    "variance_scan_rows",
    "format_cell",
    "read_csv",
    "schema_header",
    "write_csv",
    "ConfigError",
    "ExperimentConfig",
    "build_parser",
    "config_from_dict",
    "config_from_json",
    "main",
    "run",
    "run_oracle_check",
    "verify_run_directory",
]
