#ifndef EFFICO_H
#define EFFICO_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum EfficoProblem {
  EFFICO_PROBLEM_MAXIMIN = 0,
  EFFICO_PROBLEM_CONVEXIFIED_MAXIMIN = 1,
  EFFICO_PROBLEM_CONVEXIFIED_MINIMAX = 2,
  EFFICO_PROBLEM_MINIMAX = 3,
} EfficoProblem;

// Result of every call. Codes 2 and 3 match the command-line exit codes.
typedef enum EfficoStatus {
  EFFICO_STATUS_OK = 0,
  EFFICO_STATUS_NULL_POINTER = 1,
  EFFICO_STATUS_INVALID_INPUT = 2,
  EFFICO_STATUS_NUMERICAL_FAILURE = 3,
  EFFICO_STATUS_INVALID_UTF8 = 4,
  EFFICO_STATUS_OVERFLOW = 5,
  EFFICO_STATUS_PANIC = 6,
} EfficoStatus;

typedef enum EfficoUtility {
  EFFICO_UTILITY_LOG = 0,
  EFFICO_UTILITY_EXP = 1,
  // `x^alpha / alpha`; requires `alpha < 1`, `alpha != 0`.
  EFFICO_UTILITY_POWER = 2,
} EfficoUtility;

typedef struct EfficoDistribution EfficoDistribution;

typedef struct EfficoMarket EfficoMarket;

typedef struct EfficoRegimeModel EfficoRegimeModel;

typedef struct EfficoSolution EfficoSolution;

// Optimal expected-utility payoff `(3x0 − 2x*, x0, x*)`.
typedef struct EfficoWealth {
  double x_star;
  double payoff[3];
  double value;
} EfficoWealth;

// Distributional superhedging cost of the stock and its shortfall from `s0`.
typedef struct EfficoGap {
  double s0;
  double cost;
  double gap;
  double q_star;
} EfficoGap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *effico_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *effico_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string returned through an out-pointer of this
// library that has not been freed yet.
void effico_string_free(char *s);

// Market with `n_assets` risky assets over `n_states` equiprobable states.
// `s_t` is row-major, one row of terminal prices per asset.
//
// # Safety
// `s0` must point to `n_assets` doubles and `s_t` to `n_assets * n_states`.
enum EfficoStatus effico_market_new(const double *s0,
                                    size_t n_assets,
                                    const double *s_t,
                                    size_t n_states,
                                    struct EfficoMarket **out);

// The three-state market `S0 = 2`, `S_T = (4, 2, 1)`.
//
// # Safety
// `out` must be a valid pointer.
enum EfficoStatus effico_market_canonical(struct EfficoMarket **out);

// Market from JSON such as `{"n": 3, "s0": [2], "sT": [[4, 2, 1]]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum EfficoStatus effico_market_from_json(const char *json, struct EfficoMarket **out);

// Number of states, or 0 for NULL.
//
// # Safety
// `market` must be NULL or a live handle.
size_t effico_market_states(const struct EfficoMarket *market);

// # Safety
// `market` must be NULL or a handle not yet freed.
void effico_market_free(struct EfficoMarket *market);

// Equiprobable distribution with the given atoms.
//
// # Safety
// `values` must point to `n` doubles and `out` be a valid pointer.
enum EfficoStatus effico_distribution_new(const double *values,
                                          size_t n,
                                          struct EfficoDistribution **out);

// # Safety
// `dist` must be NULL or a handle not yet freed.
void effico_distribution_free(struct EfficoDistribution *dist);

// Solves one of the four cost-efficiency problems with the generic solvers.
//
// # Safety
// Handles must be live and `out` a valid pointer.
enum EfficoStatus effico_solve(const struct EfficoMarket *market,
                               const struct EfficoDistribution *dist,
                               enum EfficoProblem problem,
                               struct EfficoSolution **out);

// # Safety
// `solution` must be a live handle and `value` a valid pointer.
enum EfficoStatus effico_solution_value(const struct EfficoSolution *solution, double *value);

// Number of optimizer descriptions, or 0 for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
size_t effico_solution_optimizer_count(const struct EfficoSolution *solution);

// Full solution as JSON; free the result with `effico_string_free`.
//
// # Safety
// `solution` must be a live handle and `out` a valid pointer.
enum EfficoStatus effico_solution_to_json(const struct EfficoSolution *solution,
                                          bool decimal,
                                          char **out);

// # Safety
// `solution` must be NULL or a handle not yet freed.
void effico_solution_free(struct EfficoSolution *solution);

// Exact three-state value `num/den` (lowest terms, `den > 0`). Atoms are
// decimal or `"p/q"` strings with `x < y < z`.
//
// # Safety
// String arguments must be NUL-terminated; out-pointers must be valid.
enum EfficoStatus effico_three_state_value(const char *x,
                                           const char *y,
                                           const char *z,
                                           enum EfficoProblem problem,
                                           int64_t *num,
                                           int64_t *den);

// Exact three-state solution as JSON (fractions as strings unless
// `decimal`); free the result with `effico_string_free`.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be valid.
enum EfficoStatus effico_three_state_json(const char *x,
                                          const char *y,
                                          const char *z,
                                          enum EfficoProblem problem,
                                          bool decimal,
                                          char **out);

// Optimal payoff in the three-state market for initial wealth `x0`;
// `alpha` is read only for power utility.
//
// # Safety
// `out` must be a valid pointer.
enum EfficoStatus effico_optimal_wealth(enum EfficoUtility kind,
                                        double alpha,
                                        double x0,
                                        struct EfficoWealth *out);

// Regime-switching model; `sigma_high >= sigma_low > 0`, `0 < p <= 1`.
//
// # Safety
// `out` must be a valid pointer.
enum EfficoStatus effico_regime_model_new(double mu,
                                          double sigma_high,
                                          double sigma_low,
                                          double p,
                                          double horizon,
                                          double s0,
                                          struct EfficoRegimeModel **out);

// `mu = 0.05`, `sigma_high = 0.3`, `sigma_low = 0.15`, `p = 0.5`, `T = 1`, `s0 = 1`.
//
// # Safety
// `out` must be a valid pointer.
enum EfficoStatus effico_regime_model_default(struct EfficoRegimeModel **out);

// # Safety
// `model` must be NULL or a handle not yet freed.
void effico_regime_model_free(struct EfficoRegimeModel *model);

// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum EfficoStatus effico_stochvol_gap(const struct EfficoRegimeModel *model, struct EfficoGap *out);

// Costs of the moment-matched normal and lognormal targets at each of the
// `n` increasing variances, written to the caller's `n`-element buffers.
//
// # Safety
// `variances`, `cost_normal` and `cost_lognormal` must each hold `n` doubles.
enum EfficoStatus effico_stochvol_curve(const struct EfficoRegimeModel *model,
                                        const double *variances,
                                        size_t n,
                                        size_t threads,
                                        double *cost_normal,
                                        double *cost_lognormal);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EFFICO_H */
