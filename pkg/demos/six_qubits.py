"""Overlapping tomography of a six-photon GHZ state from 21 settings.

Full tomography would need 729 settings. Three divides of the six qubits
separate every pair, giving 3 + 6 * 3 = 21 settings; at 700 events each
all 15 two-qubit marginals come out close to the ideal ones.

    python demos/six_qubits.py
"""

from qotomo import (
    NoiseSpec,
    estimate_pairs,
    fidelity,
    generate_divides,
    ghz_state,
    partial_trace,
    posterior_mean,
    pure_density,
    qot_schedule,
    simulate_dataset,
    von_neumann_entropy,
)

ghz = pure_density(ghz_state(6))
for d in generate_divides(6):
    print("divide", *d.groups())
schedule = qot_schedule(6).settings
print(f"{len(schedule)} settings: {' '.join(schedule)}\n")

data = simulate_dataset(ghz, schedule, NoiseSpec(700, 0.005, seed=3))
pairs = estimate_pairs(data)
print("pair     fidelity  entropy")
for pair, samples in pairs.items():
    rho = posterior_mean(samples)
    f = fidelity(partial_trace(ghz, pair), rho)
    print(f"{pair!s:8} {f:.4f}    {von_neumann_entropy(rho):.4f}")
