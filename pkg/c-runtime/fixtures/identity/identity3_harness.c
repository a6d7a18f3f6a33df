/* identity3_harness.c (generated; do not edit) */
#define _POSIX_C_SOURCE 199309L
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <time.h>
#include "identity3_solver.h"

#define LINE_MAX_LEN 1048576

static int parse_row(char *line, identity3_real *g)
{
    int count = 0;
    char *tok = strtok(line, ",\n\r");
    while (tok != NULL) {
        char *end = NULL;
        double v;
        while (*tok == ' ' || *tok == '\t') {
            ++tok;
        }
        if (*tok == '\0') {
            tok = strtok(NULL, ",\n\r");
            continue;
        }
        v = strtod(tok, &end);
        if (end == tok) {
            return -1;
        }
        if (count < IDENTITY3_N) {
            g[count] = (identity3_real)v;
        }
        ++count;
        tok = strtok(NULL, ",\n\r");
    }
    return count;
}

static int looks_like_header(const char *line)
{
    while (*line == ' ' || *line == '\t') {
        ++line;
    }
    return (*line >= 'a' && *line <= 'z') || (*line >= 'A' && *line <= 'Z');
}

int main(int argc, char **argv)
{
    static char line[LINE_MAX_LEN];
    static identity3_real g[IDENTITY3_N];
    static identity3_real y[IDENTITY3_N];
    FILE *in, *out;
    long bench = 0;
    long row = 0;
    long data_rows = 0;
    int i;

    if (argc < 3) {
        fprintf(stderr, "usage: %s <vectors.csv> <out.csv> [--bench k]\n", argv[0]);
        return 1;
    }
    if (argc >= 5 && strcmp(argv[3], "--bench") == 0) {
        bench = strtol(argv[4], NULL, 10);
    }
    in = fopen(argv[1], "r");
    if (in == NULL) {
        fprintf(stderr, "cannot open %s\n", argv[1]);
        return 1;
    }
    out = fopen(argv[2], "w");
    if (out == NULL) {
        fclose(in);
        fprintf(stderr, "cannot open %s\n", argv[2]);
        return 1;
    }
    fprintf(out, "y_0");
    for (i = 1; i < IDENTITY3_N; ++i) {
        fprintf(out, ",y_%d", i);
    }
    fprintf(out, "\n");

    while (fgets(line, sizeof line, in) != NULL) {
        int count;
        if (row == 0 && looks_like_header(line)) {
            ++row;
            continue;
        }
        if (line[0] == '\n' || line[0] == '\0') {
            continue;
        }
        count = parse_row(line, g);
        if (count < 0) {
            fclose(in);
            fclose(out);
            fprintf(stderr, "parse failure at row %ld\n", row);
            return 1;
        }
        if (count != IDENTITY3_N && count != 2 * IDENTITY3_N) {
            fclose(in);
            fclose(out);
            fprintf(stderr, "row %ld has %d values, expected %d or %d\n",
                    row, count, IDENTITY3_N, 2 * IDENTITY3_N);
            return 2;
        }
        identity3_solve(g, y);
        for (i = 0; i < IDENTITY3_N; ++i) {
            fprintf(out, i ? ",%.17g" : "%.17g", (double)y[i]);
        }
        fprintf(out, "\n");
        ++row;
        ++data_rows;

        if (bench > 0 && data_rows == 1) {
            volatile identity3_real sink = 0;
            struct timespec a, b;
            long it;
            double ns;
            clock_gettime(CLOCK_MONOTONIC, &a);
            for (it = 0; it < bench; ++it) {
                identity3_solve(g, y);
                sink += y[0];
            }
            clock_gettime(CLOCK_MONOTONIC, &b);
            ns = (double)(b.tv_sec - a.tv_sec) * 1e9 + (double)(b.tv_nsec - a.tv_nsec);
            fprintf(stderr, "bench: %ld solves, %.1f ns/solve\n", bench, ns / (double)bench);
            (void)sink;
        }
    }
    fclose(in);
    fclose(out);
    return 0;
}
