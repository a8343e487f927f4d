#pragma once

#include "symdisc/rng.hpp"
#include "symdisc/selection.hpp"
#include "symdisc/types.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace symdisc {

struct FinetuneConfig {
    int epochs = 100;
    double learning_rate = 0.1;
    double momentum = 0.5;
    Index batch = 1024;
    double ortho_penalty_weight = 0.1;
    double bandwidth = 3.0;
    double lr_backoff = 0.3;
    int max_restarts = 10;
};

struct FinetuneTrace {
    std::vector<double> loss;          // per-epoch means, final attempt only
    std::vector<double> learning_rates;
    int restarts = 0;
    Matrix W;
    double final_grad_norm = 0.0;
};

// ||W^T W - I||_F^2 and its gradient 4 W (W^T W - I).
std::pair<double, Matrix> ortho_penalty(const Matrix& W);

// Batched squared-MMD between X and X A_W^T (self pairs omitted) for
// A_W = W diag(signs) W^T, plus the analytic gradient with respect to W.
// Exposed for finite-difference checking.
std::pair<double, Matrix> mmd_loss_grad(const Matrix& Xbatch, const Matrix& W, const Vector& signs,
                                        double bandwidth, double ortho_penalty_weight);

// SGD with momentum on W, restarting from W_init with a reduced learning
// rate whenever a non-finite value appears.
FinetuneTrace finetune(const Matrix& X, const Vector& signs, const Matrix& W_init,
                       const FinetuneConfig& config, Rng& rng);

// CSV: epoch,loss,lr,restarts
void write_trace_csv(std::ostream& out, const FinetuneTrace& trace);

}  // namespace symdisc
