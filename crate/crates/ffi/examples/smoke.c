/* Minimal C client: prints the headline design numbers. */
#include <stdio.h>
#include "qfc.h"

int main(void) {
    QfcCouplers c = {0.03, 0.004, 0.03, 0.003, 0.005, 0.05};
    double eta = 0.0, period = 0.0, r_eff = 0.0;
    int64_t m = 0;
    uint64_t channels = 0;
    QfcPath *bend = NULL;

    if (qfc_eta_max_couplings(74.0, 1.73, 0.2, &c, &eta) != QFC_STATUS_OK) goto fail;
    if (qfc_qpm_order(550, 875, 1584, &m) != QFC_STATUS_OK) goto fail;
    if (qfc_poling_period(74.0, m, &period) != QFC_STATUS_OK) goto fail;
    if (qfc_channel_count(20.0, 0.2, 360.0, &channels) != QFC_STATUS_OK) goto fail;
    if (qfc_euler_bend(300.0, 28.5, 1.5707963267948966, 1730.0, 1024, &bend) != QFC_STATUS_OK) goto fail;
    if (qfc_path_effective_radius(bend, &r_eff) != QFC_STATUS_OK) goto fail;
    qfc_path_free(bend);

    printf("eta_max=%.4f M=%lld period=%.5f channels=%llu r_eff=%.3f\n",
           eta, (long long)m, period, (unsigned long long)channels, r_eff);

    if (qfc_poling_period(74.0, 0, &period) == QFC_STATUS_OK) return 2;
    printf("error=%s\n", qfc_last_error());
    return 0;

fail:
    fprintf(stderr, "qfc: %s\n", qfc_last_error());
    return 1;
}
