/* identity3_solver.c (generated; do not edit) */
#include "identity3_solver.h"

static const identity3_real IDENTITY3_M[IDENTITY3_N * IDENTITY3_N] = {
    1.0, 0.0, 0.0, 0.0,
    1.0, 0.0, 0.0, 0.0,
    1.0
};

static const identity3_real IDENTITY3_YH[IDENTITY3_N] = {
    0.0, 0.0, 0.0
};

static const identity3_real IDENTITY3_S[IDENTITY3_N] = {
    1.0, 1.0, 1.0
};

void identity3_solve(const identity3_real *g, identity3_real *y)
{
    int r, c;
    for (r = 0; r < IDENTITY3_N; ++r) {
        identity3_real acc = (identity3_real)0;
        for (c = 0; c < IDENTITY3_N; ++c) {
            acc += IDENTITY3_M[(long)r * IDENTITY3_N + c] * g[c];
        }
        y[r] = acc + IDENTITY3_YH[r];
    }
}

void identity3_sigma(identity3_real sigma_g, identity3_real *sigma_y)
{
    int i;
    for (i = 0; i < IDENTITY3_N; ++i) {
        sigma_y[i] = sigma_g * IDENTITY3_S[i];
    }
}
