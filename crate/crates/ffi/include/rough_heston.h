#ifndef ROUGH_HESTON_H
#define ROUGH_HESTON_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes shared by every function.
typedef enum RhStatus {
  RH_STATUS_OK = 0,
  RH_STATUS_NULL_POINTER = 1,
  RH_STATUS_INVALID_PARAMETER = 2,
  RH_STATUS_DOMAIN = 3,
  RH_STATUS_ACCURACY = 4,
  RH_STATUS_NUMERICAL_FAILURE = 5,
  RH_STATUS_DEGENERATE = 6,
  RH_STATUS_CONFIG = 7,
  RH_STATUS_IO = 8,
  RH_STATUS_INVALID_UTF8 = 9,
  RH_STATUS_PANIC = 10,
} RhStatus;

// A scaled small-time cumulant generating function Λ̄(p).
typedef struct RhCgf RhCgf;

// A run configuration for the command interface.
typedef struct RhConfig RhConfig;

// Model parameters (α, λ, θ, ν, ρ, V₀).
typedef struct RhModel RhModel;

// Message describing the most recent failure on the calling thread. The
// pointer stays valid until the next failing call on the same thread.
const char *rh_last_error(void);

// Library version as a static NUL-terminated string.
const char *rh_version(void);

// Release a string returned by the library.
//
// # Safety
// `s` must be NULL or a pointer returned by this library and not yet freed.
void rh_string_free(char *s);

// Create a model. α ∈ [½, 1], ν ≥ 0, |ρ| < 1, θ > 0, V₀ > 0.
//
// # Safety
// `out` must be valid for writes.
enum RhStatus rh_model_new(double alpha,
                           double lambda,
                           double theta,
                           double nu,
                           double rho,
                           double v0,
                           struct RhModel **out);

// # Safety
// `model` must be NULL or a handle from [`rh_model_new`] not yet freed.
void rh_model_free(struct RhModel *model);

// log E(e^{pX_t}) from an `n_steps` Adams solve; `finite` is set to 0 when
// the moment explodes before t (the value is then +∞).
//
// # Safety
// Pointers must be valid; `model` must be a live handle.
enum RhStatus rh_log_mgf(const struct RhModel *model,
                         double p,
                         double t,
                         uintptr_t n_steps,
                         double *value,
                         int32_t *finite);

// Λ̄ from its fractional power series with `n_terms` terms (valid inside 90%
// of the radius of convergence).
//
// # Safety
// Pointers must be valid; `model` must be a live handle.
enum RhStatus rh_cgf_series_new(const struct RhModel *model, uintptr_t n_terms, struct RhCgf **out);

// Λ̄ tabulated from `n_steps`-step Adams solves out to the critical moments.
//
// # Safety
// Pointers must be valid; `model` must be a live handle.
enum RhStatus rh_cgf_table_new(const struct RhModel *model, uintptr_t n_steps, struct RhCgf **out);

// # Safety
// `cgf` must be NULL or a handle from an `rh_cgf_*_new` function not yet freed.
void rh_cgf_free(struct RhCgf *cgf);

// Λ̄(p) (+∞ outside the domain).
//
// # Safety
// Pointers must be valid; `cgf` must be a live handle.
enum RhStatus rh_cgf_eval(const struct RhCgf *cgf, double p, double *value);

// Endpoints (p₋, p₊) of the domain of Λ̄.
//
// # Safety
// Pointers must be valid; `cgf` must be a live handle.
enum RhStatus rh_cgf_domain(const struct RhCgf *cgf, double *p_minus, double *p_plus);

// Rate function I(x) = sup_p (px − Λ̄(p)) and its maximiser p*.
//
// # Safety
// Pointers must be valid; `cgf` must be a live handle.
enum RhStatus rh_rate_function(const struct RhCgf *cgf, double x, double *rate, double *p_star);

// Leading-order small-time implied volatility σ̂(x).
//
// # Safety
// Pointers must be valid; handles must be live.
enum RhStatus rh_smile_leading(const struct RhCgf *cgf,
                               const struct RhModel *model,
                               double x,
                               double *vol);

// Higher-order implied volatility at scaled log-moneyness x and maturity t,
// priced along the saddlepoint contour with the first correction.
//
// # Safety
// Pointers must be valid; handles must be live.
enum RhStatus rh_smile_higher_order(const struct RhCgf *cgf,
                                    const struct RhModel *model,
                                    double x,
                                    double t,
                                    double *vol);

// Call price E(e^{X_t} − e^k)⁺ by Lewis' formula with `n_points`
// Gauss-Legendre nodes on [0, u_max] and `n_steps`-step Adams solves.
//
// # Safety
// Pointers must be valid; `model` must be a live handle.
enum RhStatus rh_lewis_call(const struct RhModel *model,
                            double k,
                            double t,
                            uintptr_t n_steps,
                            uintptr_t n_points,
                            double u_max,
                            double *price);

// Black-Scholes implied volatility of a call (`is_call` ≠ 0) or put price.
//
// # Safety
// `vol` must be valid for writes.
enum RhStatus rh_implied_vol(double price, double k, double t, int32_t is_call, double *vol);

// Large-time implied volatility σ∞(x) (requires λ > 0, ρ ≤ 0).
//
// # Safety
// Pointers must be valid; `model` must be a live handle.
enum RhStatus rh_smile_large_time(const struct RhModel *model, double x, double *vol);

// H = 0 limit smile σ̂₀ at `n` points `xs` (requires α = ½), written to `vols`.
//
// # Safety
// `xs` and `vols` must be valid for `n` elements; `model` must be a live handle.
enum RhStatus rh_smile_h0(const struct RhModel *model,
                          uintptr_t n_points,
                          double u_max,
                          const double *xs,
                          uintptr_t n,
                          double *vols);

// Configuration from a named preset (`table`, `fig3`, `fig4`, `fig5`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be valid for writes.
enum RhStatus rh_config_new(const char *name, struct RhConfig **out);

// Apply `key = value` lines to a configuration.
//
// # Safety
// `config` must be a live handle; `text` a NUL-terminated string.
enum RhStatus rh_config_apply(struct RhConfig *config, const char *text);

// # Safety
// `config` must be NULL or a handle from [`rh_config_new`] not yet freed.
void rh_config_free(struct RhConfig *config);

// Run a command (`smile`, `rate`, `largetime`, `h0`, `mc`, `calibrate-theta`,
// `calibrate-rho`) and return its table as CSV (`json` = 0) or JSON text in
// `*output` (free with [`rh_string_free`]). `*failed_rows` receives the
// number of rows that could not be computed.
//
// # Safety
// Pointers must be valid; `config` must be a live handle.
enum RhStatus rh_run(const struct RhConfig *config,
                     const char *command,
                     int32_t json,
                     char **output,
                     uintptr_t *failed_rows);

// Evaluate log E(e^{qX_t}) at complex q = re + i·im.
//
// # Safety
// Pointers must be valid; `model` must be a live handle.
enum RhStatus rh_log_mgf_complex(const struct RhModel *model,
                                 double re,
                                 double im,
                                 double t,
                                 uintptr_t n_steps,
                                 double *out_re,
                                 double *out_im);

#endif /* ROUGH_HESTON_H */
