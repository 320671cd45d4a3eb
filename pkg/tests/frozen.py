"""Values produced by tests/oracles.py and frozen here; test_oracles.py re-derives them."""

QUINTIC_HSTAR = (1, 121, 381, 121, 1)
ELLIPTIC_HSTAR = (1, 7, 1)
QUINTIC_EHRHART = (1, 126, 1001, 3876, 10626)
QUINTIC_HODGE_TOTAL = 208
ELLIPTIC_HODGE_TOTAL = 4

# R_1(K*, g) on the quintic: the four powers of the interior point of Delta*
QUINTIC_R1_KDUAL = (0, 1, 1, 1, 1)
# zero face contributes R_1(K*, g); the full face contributes R_1(K, f)
QUINTIC_FACE_SPLIT = {0: 4, 5: 204}
QUINTIC_BY_W = {1: 2, 2: 102, 3: 102, 4: 2}
ELLIPTIC_BY_W = {1: 2, 2: 2}
