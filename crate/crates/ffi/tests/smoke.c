#include <stdio.h>
#include "qsubnet.h"

int main(void) {
    double f = 0.0;
    if (qsn_swap_pair(0.9, 0.9, &f) != QSN_STATUS_OK) return 1;
    if (f < 0.8133333 || f > 0.8133334) return 2;

    QsnProblem *p = NULL;
    if (qsn_problem_new(1.0, 1.0, 0.9, 0.016, &p) != QSN_STATUS_OK) return 3;
    qsn_problem_add_network(p, 500, 2, 0.1);
    qsn_problem_add_network(p, 500, 2, 0.1);
    QsnSolution *s = NULL;
    if (qsn_problem_solve(p, QSN_PARAMETER_PROBABILITY, &s) != QSN_STATUS_OK) return 4;
    double eta = 0.0;
    qsn_solution_value(s, 0, &eta);
    qsn_solution_free(s);
    qsn_problem_free(p);
    if (eta < 0.355655 || eta > 0.355657) return 5;

    if (qsn_swap_pair(2.0, 0.9, &f) != QSN_STATUS_INVALID_ARGUMENT) return 6;
    printf("%s %.6f\n", qsn_version(), eta);
    return 0;
}
