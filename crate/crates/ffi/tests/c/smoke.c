#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "sepdiag.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        enum SepStatus s_ = (call);                                              \
        if (s_ != SEP_STATUS_OK) {                                               \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_,              \
                    sep_last_error_message());                                   \
            return 1;                                                            \
        }                                                                        \
    } while (0)

static const char *CONFIG =
    "{\"dims\": {\"n\": 1, \"m\": 1},"
    " \"sets\": {\"C\": {\"shape\": \"box\", \"lower\": [0], \"upper\": [\"inf\"], \"window\": 2},"
    "            \"Q\": {\"shape\": \"box\", \"lower\": [0], \"upper\": [\"inf\"], \"window\": 2}},"
    " \"exprs\": {\"f\": \"p^2 - x^2\", \"g\": \"q - y\"},"
    " \"operator\": {\"matrix\": [[1]]},"
    " \"grids\": {\"h_out\": 0.0625, \"h_in\": 0.0009765625}}";

int main(void) {
    struct SepProblem *problem = NULL;
    CHECK(sep_problem_from_json(CONFIG, &problem));

    size_t n = 0, m = 0;
    CHECK(sep_problem_dims(problem, &n, &m));
    if (n != 1 || m != 1) return 2;

    double x = 0.5, y = 0.5, r = 0.0;
    CHECK(sep_eps_residual(problem, &x, 1, &y, 1, &r));
    if (r < 0.24 || r > 0.51) return 3;

    struct SepCloud *cloud = NULL;
    CHECK(sep_approx_solution_set(problem, 0.01, &cloud));
    size_t len = sep_cloud_len(cloud), dim = sep_cloud_dim(cloud);
    double *points = malloc(len * dim * sizeof(double));
    CHECK(sep_cloud_points(cloud, points, len * dim));
    if (len == 0 || dim != 2 || points[0] != 0.0) return 4;
    free(points);
    sep_cloud_free(cloud);

    char *json = NULL;
    CHECK(sep_check_json(problem, "monotone", &json));
    if (strstr(json, "holds-on-samples") == NULL) return 5;
    sep_string_free(json);

    if (sep_check_json(problem, "bogus", &json) != SEP_STATUS_INVALID_ARGUMENT) return 6;
    if (strstr(sep_last_error_message(), "bogus") == NULL) return 7;

    sep_problem_free(problem);
    printf("ok\n");
    return 0;
}
