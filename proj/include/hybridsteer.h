#ifndef HYBRIDSTEER_H
#define HYBRIDSTEER_H

/* C API of the hybridsteer library.
 *
 * A hybrid CV-DV entanglement simulator and EPR-steering certification
 * engine: state modeling with losses, sign-binned homodyne assemblages,
 * steering SDPs, synthetic data generation, maximum-likelihood tomography
 * and Metropolis-Hastings error bars.
 *
 * All functions returning int use the status codes below; on any nonzero
 * status, hst_last_error() describes the failure (thread-local). Objects
 * are opaque handles owned by the caller and released with the matching
 * _free function. Strings returned through char** are heap-allocated and
 * released with hst_string_free().
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes (also used as CLI exit codes). */
#define HST_OK 0
#define HST_ERR_CONFIG 2
#define HST_ERR_NUMERICAL 3
#define HST_ERR_IO 4

typedef struct hst_config hst_config;
typedef struct hst_assemblage hst_assemblage;
typedef struct hst_sdp_result hst_sdp_result;

const char* hst_version(void);
const char* hst_last_error(void);
void hst_string_free(char* s);

/* --- configuration ------------------------------------------------------ */
int hst_config_default(hst_config** out);
int hst_config_parse(const char* json_text, hst_config** out);
int hst_config_load(const char* path, hst_config** out);
/* key=value with dotted paths, e.g. "mh.thin=2" or "R=0.37". */
int hst_config_override(hst_config* cfg, const char* key_value);
int hst_config_to_json(const hst_config* cfg, char** json_out);
void hst_config_free(hst_config* cfg);

/* --- assemblages --------------------------------------------------------- */
/* Model pipeline: hybrid state, losses, sign-binned POVMs with phase noise. */
int hst_assemblage_compute(const hst_config* cfg, hst_assemblage** out);
int hst_assemblage_load(const char* path, hst_assemblage** out);
int hst_assemblage_save(const hst_assemblage* a, const char* path);
int hst_assemblage_n_phases(const hst_assemblage* a);
int hst_assemblage_dim(const hst_assemblage* a);
/* Mean pairwise fidelity between unconditioned states. */
int hst_assemblage_nonsignaling_mean(const hst_assemblage* a, double* out);
void hst_assemblage_free(hst_assemblage* a);

/* --- steering SDPs ------------------------------------------------------- */
int hst_sdp_optimal_functional(const hst_assemblage* a, hst_sdp_result** out);
int hst_sdp_lhs_membership(const hst_assemblage* a, hst_sdp_result** out);
/* 0 = optimal, 1 = infeasible, 2 = numerical-failure. */
int hst_sdp_status(const hst_sdp_result* r);
double hst_sdp_objective(const hst_sdp_result* r);
double hst_sdp_gap(const hst_sdp_result* r);
int hst_sdp_dim(const hst_sdp_result* r);
/* 1 when an LHS model was found (membership solves only). */
int hst_sdp_is_lhs_member(const hst_sdp_result* r);
int hst_sdp_save(const hst_sdp_result* r, const char* path);
void hst_sdp_result_free(hst_sdp_result* r);

/* --- workflows (CLI back ends) ------------------------------------------- */
/* Each writes its artifacts plus manifest.json into out_dir. */
int hst_run_model(const hst_config* cfg, const char* out_dir);
int hst_run_assemblage(const hst_config* cfg, const char* out_dir);
int hst_run_sdp_file(const char* assemblage_path, const char* out_dir);
/* axis: "m_A" | "R" | "eta_A". */
int hst_run_sweep(const hst_config* cfg, const char* axis, const double* values,
                  int n_values, const char* out_dir);
int hst_run_simulate(const hst_config* cfg, const char* out_dir);
int hst_run_analyze(const hst_config* cfg, const char* records_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* HYBRIDSTEER_H */
