/* identity3_solver.h */
/* Precomputed linear inverse-problem kernel, n = 3, double precision. */
/* Solves y = M g + y_h with a fixed row-major accumulation order. */
#ifndef IDENTITY3_SOLVER_H
#define IDENTITY3_SOLVER_H

#define IDENTITY3_N 3
typedef double identity3_real;

#ifdef __cplusplus
extern "C" {
#endif

/* y[i] = sum_j M[i][j] g[j] + y_h[i]; g and y must not alias. */
void identity3_solve(const identity3_real *g, identity3_real *y);

/* sigma_y[i] = sigma_g * s[i] (per-node standard deviation). */
void identity3_sigma(identity3_real sigma_g, identity3_real *sigma_y);

#ifdef __cplusplus
}
#endif

#endif /* IDENTITY3_SOLVER_H */
