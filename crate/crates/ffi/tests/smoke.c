#include <math.h>
#include <stdio.h>
#include <string.h>

#include "lamperti.h"

static const char *CONFIG =
    "{\"model\": {\"type\": \"bd\", \"beta\": 0.5, \"rho\": 0.5},"
    " \"engine\": {\"n_traj\": 16, \"horizon\": 5000, \"base_seed\": 11, \"grid_points\": 8}}";

int main(void) {
    double v = 0.0;
    if (lamperti_lambda_const(0.5, 0.5, &v) != LAMPERTI_STATUS_OK) return 1;
    if (fabs(v - pow(0.75, 2.0 / 3.0)) > 1e-12) return 2;
    if (lamperti_clt_std(1.0, 0.0, &v) != LAMPERTI_STATUS_DOMAIN) return 3;
    if (lamperti_last_error() == NULL) return 4;

    LampertiConfig *cfg = NULL;
    if (lamperti_config_from_json(CONFIG, &cfg) != LAMPERTI_STATUS_OK) return 5;
    LampertiEnsemble *ens = NULL;
    if (lamperti_ensemble_run(cfg, &ens) != LAMPERTI_STATUS_OK) return 6;
    size_t n = 0, m = 0;
    if (lamperti_ensemble_shape(ens, &n, &m) != LAMPERTI_STATUS_OK || n != 16) return 7;
    uint64_t t[64];
    double x[64];
    if (m > 64) return 8;
    if (lamperti_ensemble_samples(ens, 0, t, x, NULL, 64) != LAMPERTI_STATUS_OK) return 9;
    if (t[m - 1] != 5000) return 10;
    char *report = NULL;
    if (lamperti_ensemble_verify(cfg, ens, &report) != LAMPERTI_STATUS_OK) return 11;
    if (strstr(report, "\"checks\"") == NULL) return 12;
    printf("%s %zu %zu %.6f\n", lamperti_version(), n, m, x[m - 1]);
    lamperti_string_free(report);
    lamperti_ensemble_free(ens);
    lamperti_config_free(cfg);
    return 0;
}
