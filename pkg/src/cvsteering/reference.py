"""Published reference values, used for the self-auditing table columns."""

# n -> (|BI_max|/2, entropic ratio, 4 x Reid product), LG modes with m = 0
LG_TABLE = {
    0: (1.0, 1.0, 1.0),
    1: (1.11934, 1.04381, 2.25),
    2: (1.17437, 1.0567, 2.77778),
    3: (1.20128, 1.06256, 3.0625),
    4: (1.21738, 1.06572, 3.24),
    5: (1.22813, 1.06758, 3.36111),
    6: (1.23584, 1.0687, 3.44898),
    7: (1.24165, 1.06939, 3.51563),
    8: (1.24618, 1.0698, 3.5679),
    9: (1.24982, 1.07002, 3.61),
    10: (1.25281, 1.07011, 3.64463),
}

SWEEP_R = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4)

# r -> (|BI_max|/2, entropic ratio)
TMSV_TABLE = dict(zip(SWEEP_R, [
    (1.0, 1.0), (1.040, 1.038), (1.091, 1.157), (1.125, 1.383),
    (1.144, 1.790), (1.153, 2.616), (1.159, 4.991), (1.160, 62.737),
]))
SUB1_TABLE = dict(zip(SWEEP_R, [
    (1.120, 1.044), (1.189, 1.061), (1.229, 1.124), (1.252, 1.264),
    (1.263, 1.529), (1.267, 2.027), (1.271, 3.132), (1.271, 7.531),
]))

TMSV_BELL_MAX = 2.32449
SUB1_BELL_MAX = 2.5444
SUB2_BELL_MAX = 2.6305
NOON1_BELL_MAX = 2.2387
CLOSED_FORM_MAX = 2.19055

# printed optimal settings (alpha1, alpha2, beta1, beta2, r)
TMSV_SETTINGS = (0.0036990, -0.0115244, -0.0039127, 0.0113108, 3.8853675)
SUB1_SETTINGS = (-0.0067, 0.0201, 0.0067, -0.0201, 3.0)
SUB2_SETTINGS = (-0.1338, -0.1392, -0.1365, -0.1311, 4.4015)
NOON1_SETTINGS = (0.0610285, -0.339053, -0.0610285, 0.339053)
