/* Plain C client: the public header must compile and link without C++. */
#include <stdlib.h>

#include "gnsfde/gnsfde.h"

int gn_c_client_roundtrip(double* terminal) {
    gn_grid* grid = NULL;
    gn_coeffs* coeffs = NULL;
    gn_policy* policy = NULL;
    gn_gbm* gbm = NULL;
    gn_path* eta = NULL;
    gn_path* x = NULL;
    double* values = NULL;
    int rc = 1;

    if (gn_grid_create(0.1, 1.0, 110, &grid) != GN_OK) goto done;
    if (gn_coeffs_example(0.1, &coeffs) != GN_OK) goto done;
    if (gn_policy_constant(1.0, 0.65, 1.0, &policy) != GN_OK) goto done;
    if (gn_gbm_sample(policy, grid, 7, &gbm) != GN_OK) goto done;
    values = malloc(gn_grid_size(grid) * sizeof(double));
    if (values == NULL) goto done;
    for (size_t k = 0; k < gn_grid_size(grid); ++k) values[k] = 1.0;
    if (gn_path_create(grid, values, gn_grid_size(grid), &eta) != GN_OK) goto done;
    if (gn_simulate(coeffs, eta, gbm, &x) != GN_OK) goto done;
    if (gn_path_values(x, values, gn_grid_size(grid)) != GN_OK) goto done;
    *terminal = values[gn_grid_size(grid) - 1];
    rc = 0;

done:
    free(values);
    gn_path_destroy(x);
    gn_path_destroy(eta);
    gn_gbm_destroy(gbm);
    gn_policy_destroy(policy);
    gn_coeffs_destroy(coeffs);
    gn_grid_destroy(grid);
    return rc;
}
