# CSATN uplink analysis modules
# Coverage and ergodic rate of the terminal -> UAV -> satellite uplink, analytic and simulated
