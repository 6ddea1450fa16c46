#ifndef QFC_H
#define QFC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QfcStatus {
  QFC_STATUS_OK = 0,
  QFC_STATUS_NULL_POINTER = 1,
  QFC_STATUS_INVALID_INPUT = 2,
  QFC_STATUS_OUT_OF_RANGE = 3,
  QFC_STATUS_NO_SOLUTION = 4,
  QFC_STATUS_NO_CONVERGENCE = 5,
  QFC_STATUS_NO_DIP = 6,
  QFC_STATUS_MULTIPLE_DIPS = 7,
  QFC_STATUS_CONFIG = 8,
  QFC_STATUS_BUFFER_TOO_SMALL = 9,
  QFC_STATUS_IO = 10,
  QFC_STATUS_PANIC = 11,
} QfcStatus;

typedef enum QfcBand {
  QFC_BAND_SIGNAL = 0,
  QFC_BAND_PUMP = 1,
  QFC_BAND_SF = 2,
} QfcBand;

typedef enum QfcRegime {
  QFC_REGIME_OVER = 0,
  QFC_REGIME_UNDER = 1,
  QFC_REGIME_CRITICAL = 2,
} QfcRegime;

// Opaque coupled-mode parameter set.
typedef struct QfcCmtParams QfcCmtParams;

// Opaque effective-index model.
typedef struct QfcIndexModel QfcIndexModel;

// Opaque sampled path.
typedef struct QfcPath QfcPath;

// Power coupling fractions at ports A and B per band.
typedef struct QfcCouplers {
  double kappa2_signal_a;
  double kappa2_signal_b;
  double kappa2_pump_a;
  double kappa2_pump_b;
  double kappa2_sf_a;
  double kappa2_sf_b;
} QfcCouplers;

// Intrinsic and loaded Q per band.
typedef struct QfcQSet {
  double signal_intrinsic;
  double signal_loaded;
  double pump_intrinsic;
  double pump_loaded;
  double sf_intrinsic;
  double sf_loaded;
} QfcQSet;

typedef struct QfcResonanceFit {
  double center_nm;
  double fwhm_nm;
  double loaded_q;
  double intrinsic_q;
  double min_transmission;
  double baseline;
  double rms_residual;
  // A [`QfcRegime`] value.
  int32_t regime;
  uint32_t iterations;
  bool converged;
} QfcResonanceFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until
// the next failing call on the same thread.
const char *qfc_last_error(void);

// η_max of the double-pulley ring from coupling fractions and loss.
enum QfcStatus qfc_eta_max_couplings(double radius_um,
                                     double ring_width_um,
                                     double loss_db_per_cm,
                                     const struct QfcCouplers *couplers,
                                     double *eta_out);

// η_max from measured intrinsic and loaded Q factors.
enum QfcStatus qfc_eta_max_q(const struct QfcQSet *q, double *eta_out);

// Quasi-phase-matching order `m_sf − m_s − m_p` (may be ≤ 0).
enum QfcStatus qfc_qpm_order(uint32_t m_s, uint32_t m_p, uint32_t m_sf, int64_t *order_out);

enum QfcStatus qfc_poling_period(double radius_um, int64_t order, double *period_um_out);

// Fractional round-trip propagation loss.
enum QfcStatus qfc_alpha_roundtrip(double radius_um,
                                   double ring_width_um,
                                   double loss_db_per_cm,
                                   double *alpha_out);

// Effective index that puts mode `m` on resonance at `lambda_nm`.
enum QfcStatus qfc_resonant_index(uint32_t m, double lambda_nm, double radius_um, double *n_out);

// Polynomial index model about `center_nm` valid over `[lo_nm, hi_nm]`.
enum QfcStatus qfc_index_model_new(enum QfcBand band,
                                   double center_nm,
                                   const double *coeffs,
                                   size_t n_coeffs,
                                   double lo_nm,
                                   double hi_nm,
                                   struct QfcIndexModel **model_out);

// Calibrated model of the reference ring for `band`.
enum QfcStatus qfc_index_model_reference(enum QfcBand band, struct QfcIndexModel **model_out);

enum QfcStatus qfc_index_model_n_eff(const struct QfcIndexModel *model,
                                     double lambda_nm,
                                     double *n_out);

enum QfcStatus qfc_index_model_n_group(const struct QfcIndexModel *model,
                                       double lambda_nm,
                                       double *n_out);

// Releases a model; NULL is ignored.
// # Safety
// The pointer must come from this library and must not be used afterwards.
void qfc_index_model_free(struct QfcIndexModel *model);

// Mode rates from Q factors at the given wavelengths, with `g = 0`.
enum QfcStatus qfc_cmt_params_from_q(const struct QfcQSet *q,
                                     double lambda_s_nm,
                                     double lambda_p_nm,
                                     double lambda_sf_nm,
                                     struct QfcCmtParams **params_out);

// Rates of the reference device at its design wavelengths, `g = 0`.
enum QfcStatus qfc_cmt_params_reference(struct QfcCmtParams **params_out);

// Sets `g` so the saturation pump power equals `p_opt_w`.
enum QfcStatus qfc_calibrate_g(struct QfcCmtParams *params,
                               double eta_max,
                               double p_opt_w,
                               double *g_out);

enum QfcStatus qfc_p_opt(const struct QfcCmtParams *params, double *p_opt_w_out);

// Closed-form conversion efficiency at on-chip pump power `pump_w`.
enum QfcStatus qfc_eta_of_pump(const struct QfcCmtParams *params, double pump_w, double *eta_out);

// Time-domain steady state; writes η and the flux-balance relative error.
enum QfcStatus qfc_steady_state_ode(const struct QfcCmtParams *params,
                                    double pump_w,
                                    double signal_w,
                                    double *eta_out,
                                    double *flux_error_out);

// # Safety
// The pointer must come from this library and must not be used afterwards.
void qfc_cmt_params_free(struct QfcCmtParams *params);

// Fits the single dip of a through-port trace. `hint` is
// [`QfcRegime::Over`] or [`QfcRegime::Under`].
enum QfcStatus qfc_fit_resonance(const double *wavelengths_nm,
                                 const double *transmission,
                                 size_t n,
                                 enum QfcRegime hint,
                                 struct QfcResonanceFit *fit_out);

// Samples a symmetric Euler bend.
enum QfcStatus qfc_euler_bend(double r_max_um,
                              double r_min_um,
                              double total_angle_rad,
                              double width_nm,
                              size_t n_samples,
                              struct QfcPath **path_out);

enum QfcStatus qfc_path_len(const struct QfcPath *path, size_t *len_out);

// Copies path channels into caller buffers of `capacity` elements. Any
// channel pointer may be NULL to skip it.
enum QfcStatus qfc_path_copy(const struct QfcPath *path,
                             double *s_um,
                             double *x_um,
                             double *y_um,
                             double *theta_rad,
                             double *k_per_um,
                             size_t capacity);

enum QfcStatus qfc_path_effective_radius(const struct QfcPath *path, double *radius_um_out);

// # Safety
// The pointer must come from this library and must not be used afterwards.
void qfc_path_free(struct QfcPath *path);

// Whole channels supported by the on-chip pump.
enum QfcStatus qfc_channel_count(double source_mw,
                                 double coupling,
                                 double per_channel_uw,
                                 uint64_t *count_out);

// Runs the task list of a JSON config and returns the report JSON in a
// string to be released with [`qfc_string_free`]. Relative paths resolve
// against `base_dir` (NULL for the working directory).
enum QfcStatus qfc_run_config_json(const char *config_json,
                                   const char *base_dir,
                                   char **report_out);

// # Safety
// The pointer must come from this library and must not be used afterwards.
void qfc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFC_H */
