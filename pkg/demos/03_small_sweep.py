"""A desk-sized capacity sweep: error rate as the network fills up.

Runs in well under a minute on one core.  Larger sweeps go through the
`bench` command with a spec file (see src/cliquenet/configs/).
"""

from cliquenet import GlskoParams, GwstaParams, RetrievalConfig
from cliquenet.bench import ExperimentSpec, run_experiment

ITER = frozenset({"CONV", "ITER"})
spec = ExperimentSpec(
    chi=20, ell=16, c=6, erasures=2,
    message_counts=(250, 500, 750, 1000, 1500),
    trials=300, seed=1,
    configs=(
        ("GWTA", RetrievalConfig("SOM", GwstaParams(1), ITER, 30)),
        ("GWsTA", RetrievalConfig("SOM", GwstaParams(6), ITER, 30)),
        ("single pass", RetrievalConfig("SOM", GwstaParams(6), frozenset({"ITER"}), 1)),
        ("kick-out", RetrievalConfig("SOM", GlskoParams(1, 1), frozenset({"EQSC"}))),
    ),
    include_oracle=True,
)

rows = run_experiment(spec)
names = spec.row_names
print("M      " + "".join(f"{n:>13s}" for n in names))
for M in spec.message_counts:
    by = {r.config: r for r in rows if r.M == M}
    print(f"{M:<7d}" + "".join(f"{by[n].error_rate:13.3f}" for n in names))

print("\naverage iterations")
for M in spec.message_counts:
    by = {r.config: r for r in rows if r.M == M}
    print(f"{M:<7d}" + "".join(f"{by[n].avg_iterations:13.2f}" for n in names))
