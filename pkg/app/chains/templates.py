"""Parameter sets of the reproducible figures.

Every entry is a dict of RunConfig overrides on top of the defaults
(L=7, J_q_tau=0.01, t_H=2, t_random=0.5, disorder in [0, 3], |1>|0>|2>).
"""

FIGURE_IDS = ("fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4a", "fig4b", "fig4c")

SCAN_J = [0.01, 0.008, 0.006, 0.004, 0.002]

# Published fit results for the two-excitation bath, ordered like SCAN_J.
REFERENCE_T1 = [6131.4, 9430.9, 17764.3, 36730.1, 154159.9]
REFERENCE_SIGMA_T1 = [56.8, 73.1, 127.3, 145.1, 493.1]
REFERENCE_T2 = [12484.8, 23615.2, 37487.0, 68364.3, 337756.4]
REFERENCE_SIGMA_T2 = [57.2, 155.5, 407.2, 704.4, 16337.9]

EXTRAPOLATION_J = 0.1

# Long-time mean of n_q for one qubit excitation shared with the default bath.
EQUILIBRIUM_N_Q = 0.125


COHERENT_T_MAX = 4000.0
COHERENT_SAMPLES = 4001

FIG2_CURVES = [
    ("L6_vacuum", {"L": 6, "upsilon_bits": 0b0}),
    ("L7_vacuum", {"L": 7, "upsilon_bits": 0b0}),
    ("L7_one_upsilon", {"L": 7, "upsilon_bits": 0b1}),
    ("L7_two_upsilon", {"L": 7, "upsilon_bits": 0b11}),
]


FIG3A = {"n_trajectories": 10}

FIG3B = {"n_trajectories": 10, "qubit_state": "plus"}

# Oscillating decay; the horizon covers many T1 of the fast coupling.
FIG3C = {"n_trajectories": 10, "J_q_tau": 0.1, "horizon": 1500.0}
FIG3C_PROMINENCE = 0.01

FIG3_SCAN_T1 = {"n_trajectories": 10}
FIG3_SCAN_T2 = {"n_trajectories": 10, "qubit_state": "plus"}


FIG4_TRAJECTORIES = 5

FIG4A_HOPPINGS = [0.2, 0.5, 1.0, 3.0, 7.0]
FIG4A = {"n_trajectories": FIG4_TRAJECTORIES}

# None stands for an infinite t_H, i.e. no erasure at all.
FIG4B_T_H = [None, 90.0, 50.0, 10.0, 6.0, 2.0, 1.0]
FIG4B = {"n_trajectories": FIG4_TRAJECTORIES, "horizon": 20000.0}
FIG4B_REVIVAL_MARGIN = 0.1
FIG4B_EARLY_TIME = 1000.0
FIG4B_PROMINENCE = 0.02
# moving-average span in model time, applied before counting revivals
FIG4B_SMOOTHING = 100.0

# single and double bath excitations, same seed and trajectory count
FIG4C = {"n_trajectories": 10, "upsilon_bits": 0b1}
FIG4C_DOUBLE = {"n_trajectories": 10, "upsilon_bits": 0b11}

