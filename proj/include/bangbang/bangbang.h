#ifndef BANGBANG_H
#define BANGBANG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BB_API __declspec(dllexport)
#else
#define BB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status; on failure bb_last_error() holds a message
 * for the calling thread until its next failing call. Angular frequencies
 * are rad/s, rates 1/s, lengths m, times s, angles rad, masses u. */
typedef enum bb_status {
    BB_OK = 0,
    BB_ERR_DOMAIN = 1,
    BB_ERR_NUMERICAL = 2,
    BB_ERR_CONVERGENCE = 3,
    BB_ERR_CONFIG = 4,
    BB_ERR_NULL = 5,
    BB_ERR_BUFFER = 6,
    BB_ERR_INTERNAL = 7
} bb_status;

BB_API const char* bb_version(void);
BB_API const char* bb_last_error(void);
BB_API const char* bb_status_name(bb_status status);
/* Process exit code for a status: 0 ok, 1 usage/config, 2 numerical. */
BB_API int bb_exit_code(bb_status status);

typedef enum bb_quantity_kind {
    BB_ANGULAR_FREQUENCY = 0,
    BB_RATE = 1,
    BB_LENGTH = 2,
    BB_TIME = 3,
    BB_ANGLE = 4,
    BB_MASS = 5
} bb_quantity_kind;

/* "2.3505 MHz" -> rad/s, "75 nm" -> m, "45 deg" -> rad, ... */
BB_API bb_status bb_parse_quantity(const char* text, bb_quantity_kind kind, double* out);

/* Special functions. */
BB_API bb_status bb_laguerre(int64_t n, int order, double x, double* out);
BB_API bb_status bb_bessel_j(int order, double x, double* out);

/* Oscillator. */
typedef struct bb_oscillator bb_oscillator;

BB_API bb_status bb_oscillator_create(double ion_mass_u, double trap_freq, double wavelength, double beam_angle,
                                      bb_oscillator** out);
BB_API void bb_oscillator_destroy(bb_oscillator* osc);
BB_API bb_status bb_oscillator_ground_state_extent(const bb_oscillator* osc, double* out);
BB_API bb_status bb_oscillator_lamb_dicke(const bb_oscillator* osc, double* out);
BB_API bb_status bb_displacement_alpha(const bb_oscillator* osc, double x_d, double* out);
BB_API bb_status bb_residual_alpha(double alpha0, double dwell_time, double trap_freq, double* out);

/* Number-state distributions. */
typedef struct bb_distribution bb_distribution;

BB_API bb_status bb_distribution_displaced_thermal(double nbar_th, double alpha, double mass_tol, bb_distribution** out);
BB_API bb_status bb_distribution_matrix_oracle(double nbar_th, double alpha, int dim, bb_distribution** out);
BB_API void bb_distribution_destroy(bb_distribution* dist);
BB_API bb_status bb_distribution_range(const bb_distribution* dist, int64_t* n_min, int64_t* n_max);
/* Copies weights for n_min..n_max; BB_ERR_BUFFER if capacity is short
 * (count still receives the required size). */
BB_API bb_status bb_distribution_weights(const bb_distribution* dist, double* buffer, size_t capacity, size_t* count);
BB_API bb_status bb_distribution_moments(const bb_distribution* dist, double* mean, double* variance, double* mass);

/* Drive and environment, plain values. */
typedef struct bb_drive {
    int sideband;
    double rabi0;
    double detune_off;
    double decay;
} bb_drive;

typedef enum bb_stark_convention { BB_STARK_SIDEBAND_INDEXED = 0, BB_STARK_AS_PRINTED = 1 } bb_stark_convention;

typedef struct bb_stark_env {
    int enabled;
    double delta_secondary;
    double coupling_ratio;
    int sum_cutoff;
    bb_stark_convention convention;
} bb_stark_env;

BB_API void bb_stark_env_default(bb_stark_env* env);
BB_API bb_status bb_rabi_frequency(int64_t n, int sideband, double eta, double rabi0, double* out);
BB_API bb_status bb_ac_stark_shift(int64_t n, int sideband, const bb_stark_env* env, double eta, double rabi0,
                                   double trap_freq, double* out);
BB_API bb_status bb_mean_rabi(const bb_oscillator* osc, double nbar_th, double alpha, const bb_drive* drive,
                              const bb_stark_env* env, double* out);

/* Sequences and traces. */
typedef enum bb_probe_phase { BB_PROBE_AFTER_RETURN = 0, BB_PROBE_WHILE_DISPLACED = 1 } bb_probe_phase;

typedef struct bb_sequence {
    double x_d;
    double dwell_time;
    int64_t hold_periods;
    int trigger_exact_period;
    bb_probe_phase probe_phase;
    double nbar_th;
    bb_drive drive;
    bb_stark_env env;
} bb_sequence;

typedef struct bb_trace bb_trace;

/* shots == 0 gives the noiseless trace. */
BB_API bb_status bb_trace_simulate(const bb_oscillator* osc, const bb_sequence* seq, const double* probe_times,
                                   size_t count, int64_t shots, uint64_t seed, bb_trace** out);
BB_API void bb_trace_destroy(bb_trace* trace);
BB_API bb_status bb_trace_size(const bb_trace* trace, size_t* count);
/* Any output pointer may be NULL; non-NULL ones need room for size values. */
BB_API bb_status bb_trace_data(const bb_trace* trace, double* probe_times, double* p_down, double* sigma,
                               size_t capacity);
BB_API bb_status bb_trace_spectrum_peak(const bb_trace* trace, int padding, int remove_mean, int window_bins,
                                        double* center, double* sigma_center, double* width);

/* Commands behind the command-line tool. Paths are UTF-8; out paths may be
 * NULL to use the config's "output". A human-readable summary of the last
 * command on this thread is available from bb_last_summary(). */
typedef struct bb_run_options {
    int has_seed;
    uint64_t seed;
    /* Probe times below this (s) are dropped from the config; 0 keeps all. */
    double min_probe_time;
} bb_run_options;

typedef struct bb_spectrum_options {
    int padding;      /* <= 0: keep the config value */
    int remove_mean;  /* < 0: keep the config value */
    int window_bins;  /* <= 0: keep the config value */
} bb_spectrum_options;

BB_API const char* bb_last_summary(void);
BB_API bb_status bb_cmd_simulate(const char* config_path, const char* out_path, const bb_run_options* options);
/* Writes the JSON report; returns BB_ERR_CONVERGENCE if any fit failed. */
BB_API bb_status bb_cmd_fit(const char* config_path, const char* data_path, const char* report_path,
                            const bb_run_options* options);
BB_API bb_status bb_cmd_scan(const char* config_path, const char* quantity, const char* out_path,
                             const bb_run_options* options);
/* config_path may be NULL for a single trace. */
BB_API bb_status bb_cmd_spectrum(const char* config_path, const char* data_path, const char* out_path,
                                 const bb_spectrum_options* overrides);
BB_API bb_status bb_cmd_reproduce(const char* figure, const char* out_dir, const bb_run_options* options);

#ifdef __cplusplus
}
#endif

#endif
