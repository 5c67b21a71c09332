"""Grow the seed space on a simulation-count schedule during a run.

The workflow starts with a handful of seeds and adds a new one whenever
the completed-simulation counter crosses the configured interval.  Each
expansion warm-starts the emulator's seed covariance and immediately
queues a few samples at the new seed so it gets data right away.
"""

import numpy as np

from trajcal.dataspace import Dataset, DesignPoint, latin_hypercube
from trajcal.emulator import SeedKernelGP
from trajcal.expansion import ExpansionConfig
from trajcal.grid import GridConfig, LHSGrid
from trajcal.simulator import toy_objective
from trajcal.workflow import WorkflowConfig, component_stream, run


def main():
    ms = 5
    k0 = 3

    rng = component_stream(ms, "init", 0)
    X0 = latin_hypercube(20, 1, rng)
    seeds0 = 1 + np.arange(20, dtype=np.int64) % k0
    y0 = np.array([toy_objective(DesignPoint(x=X0[i], r=int(seeds0[i])))
                   for i in range(20)])
    ds = Dataset(X0, seeds0, y0)

    em = SeedKernelGP(ndim=1, nseeds=k0, nstarts=1, maxfev=80,
                      rng=np.random.default_rng(0))
    cfg = WorkflowConfig(
        budget=80,
        expansion=ExpansionConfig(nseeds=k0, nsims_expand=15, nexpansion=4),
        nTS_samp=10,
        master_seed=ms,
    )
    trace = run(ds, toy_objective, cfg, em,
                LHSGrid(GridConfig(ndim=1, nseeds=k0, ngrid=60)))

    print(f"completed {trace.completed} simulations "
          f"over {len(trace.iterations)} iterations")
    print(f"seed space grew {k0} -> {em.nseeds}\n")

    done = trace.initial_size
    events = dict(trace.expansion_events)
    print("iter  completed-before  batch  expansion")
    for it in trace.iterations:
        mark = f"added seed {events[it.iteration]}" if it.iteration in events else ""
        print(f"  {it.iteration:2d}        {done:3d}          {it.evaluated:2d}    {mark}")
        done += it.evaluated

    first_use = {}
    for e in trace.evaluations:
        first_use.setdefault(e.seed, e.iteration)
    print("\nfirst iteration each seed was evaluated:")
    for seed in sorted(first_use):
        print(f"  seed {seed}: iteration {first_use[seed]}")


if __name__ == "__main__":
    main()
