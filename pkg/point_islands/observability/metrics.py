from prometheus_client import Counter, Histogram, Info

BUILD_INFO = Info("point_islands_build", "Package metadata")

INTEGRATION_STEPS = Counter(
    "point_islands_integration_steps_total",
    "Attempted integrator steps",
    ["system", "outcome"],
)

RHS_EVALUATIONS = Counter(
    "point_islands_rhs_evaluations_total",
    "Right-hand-side evaluations",
    ["system"],
)

INTEGRATION_SECONDS = Histogram(
    "point_islands_integration_seconds",
    "Wall time of one integration",
    ["system"],
    buckets=[0.01, 0.1, 0.5, 1, 5, 15, 60, 180, 600, 1800],
)

INTEGRATION_FAILURES = Counter(
    "point_islands_integration_failures_total",
    "Integrations aborted by an error",
    ["system", "reason"],
)

SERIES_SOLVES = Counter(
    "point_islands_series_solves_total",
    "Series expansions computed",
    ["kind"],
)

SERIES_SECONDS = Histogram(
    "point_islands_series_seconds",
    "Wall time of one series expansion",
    ["kind"],
    buckets=[0.01, 0.05, 0.1, 0.25, 0.5, 1, 2.5, 5, 10, 30],
)

CHECKS = Counter(
    "point_islands_checks_total",
    "Acceptance criteria evaluated",
    ["criterion", "outcome"],
)

COMMAND_SECONDS = Histogram(
    "point_islands_command_seconds",
    "Wall time of one CLI command",
    ["command"],
    buckets=[0.1, 0.5, 1, 5, 15, 60, 180, 600, 1800, 3600],
)
