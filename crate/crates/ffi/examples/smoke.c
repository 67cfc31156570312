/* Minimal C consumer: prints the entropy of the two-measurement product bound. */
#include <stdio.h>

#include "mur.h"

int main(void) {
    MurBasis *a = NULL, *b = NULL;
    MurProfile *profile = NULL;
    if (mur_basis_builtin("A", &a) != MUR_STATUS_OK || mur_basis_builtin("B", &b) != MUR_STATUS_OK) {
        fprintf(stderr, "%s\n", mur_last_error_message());
        return 1;
    }
    const MurBasis *pair[2] = {a, b};
    if (mur_bound(pair, 2, MUR_BOUND_KIND_DIRECT_PRODUCT, &profile) != MUR_STATUS_OK) {
        fprintf(stderr, "%s\n", mur_last_error_message());
        return 1;
    }
    double h = 0.0;
    mur_profile_entropy(profile, &h);
    printf("%.4f\n", h);

    MurProfile *bad = NULL;
    if (mur_bound(pair, 1, MUR_BOUND_KIND_DIRECT_SUM, &bad) != MUR_STATUS_SEMANTIC) {
        return 1;
    }
    mur_profile_free(profile);
    mur_basis_free(a);
    mur_basis_free(b);
    return 0;
}
