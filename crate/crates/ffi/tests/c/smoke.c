#include <math.h>
#include <stdio.h>
#include <string.h>

#include "jcr.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,   \
                    __LINE__, #cond);                                \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    double lo = 0, hi = 0;
    CHECK(jcr_clopper_pearson(942, 1000, 0.95, &lo, &hi) == JCR_STATUS_OK);
    CHECK(fabs(lo - 0.9257) < 5e-4 && fabs(hi - 0.9557) < 5e-4);

    double y[5] = {0.1, -0.3, 0.4, 0.2, -0.1};
    JcrBand *band = NULL;
    CHECK(jcr_normal_mean_omega(y, 5, -5.0, 0, 0.1, &band) == JCR_STATUS_OK);
    JcrBandParams p;
    CHECK(jcr_band_params(band, &p) == JCR_STATUS_OK);
    CHECK(p.slope == 0.0 && p.is_strip == 0);
    int inside = -1;
    CHECK(jcr_band_contains(band, 123.0, 0.0, &inside) == JCR_STATUS_OK && inside == 1);

    JcrAxis t = {-1.0, 1.0, 21};
    JcrAxis ya = {-3.0, 3.0, 31};
    JcrGridRegion *grid = NULL;
    CHECK(jcr_band_rasterize(band, t, ya, &grid) == JCR_STATUS_OK);
    size_t nt = 0, ny = 0, count = 0;
    CHECK(jcr_grid_region_dims(grid, &nt, &ny) == JCR_STATUS_OK && nt == 21 && ny == 31);
    CHECK(jcr_grid_region_count_inside(grid, &count) == JCR_STATUS_OK && count > 0);
    jcr_grid_region_free(grid);
    jcr_band_free(band);

    CHECK(jcr_normal_mean_omega(y, 5, 0.0, 0, 0.1, &band) == JCR_STATUS_INVALID_ARGUMENT);
    char msg[256];
    CHECK(jcr_last_error(msg, sizeof msg) > 0 && strstr(msg, "omega") != NULL);
    CHECK(jcr_band_params(NULL, &p) == JCR_STATUS_NULL_POINTER);

    printf("ok %s\n", jcr_version());
    return 0;
}
