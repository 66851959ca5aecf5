#ifndef ILAB_H
#define ILAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IlabKernel {
  ILAB_KERNEL_KIE = 0,
  ILAB_KERNEL_VDB = 1,
} IlabKernel;

typedef enum IlabStatus {
  ILAB_STATUS_OK = 0,
  ILAB_STATUS_NULL_POINTER = 1,
  ILAB_STATUS_INVALID_PARAMETER = 2,
  ILAB_STATUS_NEAR_CRITICAL_LAYER = 3,
  ILAB_STATUS_PRECONDITION = 4,
  ILAB_STATUS_UNRESOLVED = 5,
  // Nothing unstable in the search box; an outcome, not a failure of the solver.
  ILAB_STATUS_STABLE = 6,
  ILAB_STATUS_RESOLUTION = 7,
  ILAB_STATUS_ADMISSIBILITY = 8,
  ILAB_STATUS_INTERNAL = 9,
  ILAB_STATUS_PANIC = 10,
} IlabStatus;

// Opaque radial equilibrium.
typedef struct IlabEquilibrium IlabEquilibrium;

// Opaque shear profile.
typedef struct IlabProfile IlabProfile;

typedef struct IlabComplex {
  double re;
  double im;
} IlabComplex;

// Axis-aligned search box `[re_min, re_max] × [im_min, im_max]`.
typedef struct IlabBox {
  double re_min;
  double re_max;
  double im_min;
  double im_max;
} IlabBox;

// Inputs of the oscillatory-data parameter selection (single ε).
typedef struct IlabParamRequest {
  double s;
  double alpha;
  double k;
  double d;
  uint32_t m;
  uint32_t big_m;
  double beta;
  struct IlabComplex lambda0;
  double k0;
  double gamma;
  double delta0_prime;
  double eps;
} IlabParamRequest;

typedef struct IlabParams {
  double alpha_prime;
  double kappa;
  double gamma1;
  double delta0;
  double s_eps;
  double t_eps;
  double predicted_exponent;
} IlabParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread (empty after a success).
// The pointer stays valid until the next ilab call on the same thread.
const char *ilab_last_error(void);

// Library version as a static NUL-terminated string.
const char *ilab_version(void);

// `U(z) = z`.
//
// # Safety
// `out` must be valid for writes.
enum IlabStatus ilab_profile_couette(struct IlabProfile **out);

// `U(z) = tanh(z/d1)`.
//
// # Safety
// `out` must be valid for writes.
enum IlabStatus ilab_profile_tanh(double d1, struct IlabProfile **out);

// Chebyshev series `U(z) = Σ a_k T_k(z)`.
//
// # Safety
// `coefficients` must point to `len` doubles; `out` must be valid for writes.
enum IlabStatus ilab_profile_table(const double *coefficients,
                                   size_t len,
                                   struct IlabProfile **out);

// # Safety
// `p` must come from an `ilab_profile_*` constructor and not be used afterwards.
void ilab_profile_free(struct IlabProfile *p);

// `U, U', U'', U'''` at `z` into `out[0..4]`.
//
// # Safety
// `p` must be a live profile; `out` must hold 4 doubles.
enum IlabStatus ilab_profile_eval(const struct IlabProfile *p, double z, double *out);

// Evans function `D(c)` of the Rayleigh problem.
//
// # Safety
// `p` must be a live profile; `out` must be valid for writes.
enum IlabStatus ilab_evans(const struct IlabProfile *p,
                           struct IlabComplex c,
                           struct IlabComplex *out);

// Most unstable wave speed `c₀` in the box (`γ₀ = Im c₀`). Returns
// `Stable` when the box holds no root.
//
// # Safety
// `p` must be a live profile; `c0` must be valid for writes.
enum IlabStatus ilab_gamma0_hydro(const struct IlabProfile *p,
                                  struct IlabBox b,
                                  struct IlabComplex *c0);

// `μ ∝ e^{−|v|²}` in `dim` velocity dimensions.
//
// # Safety
// `out` must be valid for writes.
enum IlabStatus ilab_equilibrium_maxwellian(uint32_t dim, struct IlabEquilibrium **out);

// `μ ∝ exp(−((|v|² − a²)/width)²)` in `dim` velocity dimensions.
//
// # Safety
// `out` must be valid for writes.
enum IlabStatus ilab_equilibrium_shell(double a,
                                       double width,
                                       uint32_t dim,
                                       struct IlabEquilibrium **out);

// # Safety
// `e` must come from an `ilab_equilibrium_*` constructor and not be used afterwards.
void ilab_equilibrium_free(struct IlabEquilibrium *e);

// Marginal `F(u)` and `F'(u)`.
//
// # Safety
// `e` must be a live equilibrium; `f` and `fp` must be valid for writes.
enum IlabStatus ilab_marginal_eval(const struct IlabEquilibrium *e,
                                   double u,
                                   double *f,
                                   double *fp);

// Dispersion function `D(λ)` for `Re λ` above the floor.
//
// # Safety
// `e` must be a live equilibrium; `out` must be valid for writes.
enum IlabStatus ilab_dispersion(const struct IlabEquilibrium *e,
                                struct IlabComplex lambda,
                                enum IlabKernel kernel,
                                struct IlabComplex *out);

// Root `λ₀` of largest real part in the box (`γ₀ = Re λ₀`). Returns
// `Stable` when the box holds no root.
//
// # Safety
// `e` must be a live equilibrium; `lambda0` must be valid for writes.
enum IlabStatus ilab_gamma0_kinetic(const struct IlabEquilibrium *e,
                                    struct IlabBox b,
                                    enum IlabKernel kernel,
                                    struct IlabComplex *lambda0);

// Derived oscillatory-data parameters; `Admissibility` names the violated inequality.
//
// # Safety
// `req` must be readable and `out` writable.
enum IlabStatus ilab_select_parameters(const struct IlabParamRequest *req, struct IlabParams *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ILAB_H */
