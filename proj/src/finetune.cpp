#include "symdisc/finetune.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace symdisc {

std::pair<double, Matrix> ortho_penalty(const Matrix& W) {
    if (W.rows() != W.cols()) throw std::invalid_argument("ortho_penalty: square W required");
    const Matrix R = W.transpose() * W - Matrix::Identity(W.cols(), W.cols());
    return {R.squaredNorm(), 4.0 * W * R};
}

std::pair<double, Matrix> mmd_loss_grad(const Matrix& Xbatch, const Matrix& W, const Vector& signs,
                                        double bandwidth, double ortho_penalty_weight) {
    const Index B = Xbatch.rows();
    const Index d = Xbatch.cols();
    if (B < 2) throw insufficient_data_error("mmd_loss_grad: batch >= 2 required");
    if (bandwidth <= 0) throw std::invalid_argument("mmd_loss_grad: bandwidth must be positive");

    const Matrix A = W * signs.asDiagonal() * W.transpose();  // symmetric
    const Matrix Y = Xbatch * A;

    const double inv_h = 1.0 / bandwidth;
    const double c = 0.5 * inv_h;
    const Vector x2 = Xbatch.rowwise().squaredNorm();
    const Vector y2 = Y.rowwise().squaredNorm();

    // Gram matrices once (transposes left as expressions: materializing them
    // first defeats Eigen's GEMM packing). Kernel values are produced in
    // column blocks so the thin downstream products run on cache-resident
    // data instead of re-streaming full B x B kernel matrices.
    Matrix Sxx(B, B), Syy(B, B), Sxy(B, B);
    Sxx.noalias() = Xbatch * Xbatch.transpose();
    Syy.noalias() = Y * Y.transpose();
    Sxy.noalias() = Xbatch * Y.transpose();
    const Matrix Xt = Xbatch.transpose();
    const Matrix Yt = Y.transpose();

    // The x-x kernel only feeds the loss value; its strict lower triangle is
    // enough. The y-y and x-y kernels also feed the gradient:
    //   (Kyy * Y)^T and (Kxy^T * X)^T, Kyy row sums, Kxy column sums.
    Matrix Gyy_t(d, B), Gxy_t(d, B);
    Vector syy(B), cxy(B);
    double sum_xx = 0.0;

    const Index BS = 128;
    const Index nblocks = (B + BS - 1) / BS;
#pragma omp parallel reduction(+ : sum_xx)
    {
        Matrix Kblk(B, BS);
        Vector seg;
#pragma omp for schedule(static)
        for (Index blk = 0; blk < nblocks; ++blk) {
            const Index j0 = blk * BS;
            const Index nb = std::min(BS, B - j0);
            auto fill = [&](const Matrix& S, const Vector& p2, const Vector& q2) {
                Kblk.leftCols(nb) = -2.0 * S.middleCols(j0, nb);
                Kblk.leftCols(nb).colwise() += p2;
                Kblk.leftCols(nb).rowwise() += q2.segment(j0, nb).transpose();
                Kblk.leftCols(nb).array() = ((-c) * Kblk.leftCols(nb).array().max(0.0)).exp();
                for (Index t = 0; t < nb; ++t) Kblk(j0 + t, t) = 0.0;  // omit self pairs
            };
            fill(Sxy, x2, y2);
            cxy.segment(j0, nb) = Kblk.leftCols(nb).colwise().sum();
            Gxy_t.middleCols(j0, nb).noalias() = Xt * Kblk.leftCols(nb);

            fill(Syy, y2, y2);
            // Column sums equal row sums by symmetry.
            syy.segment(j0, nb) = Kblk.leftCols(nb).colwise().sum();
            Gyy_t.middleCols(j0, nb).noalias() = Yt * Kblk.leftCols(nb);

            for (Index t = 0; t < nb; ++t) {
                const Index j = j0 + t;
                const Index len = B - j - 1;
                if (len == 0) continue;
                seg = ((-c) *
                       (Sxx.col(j).tail(len).array() * (-2.0) + x2(j) + x2.tail(len).array())
                           .max(0.0))
                          .exp();
                sum_xx += seg.sum();
            }
        }
    }

    const double scale = 1.0 / (static_cast<double>(B) * static_cast<double>(B - 1));
    const double data_loss = scale * (2.0 * sum_xx + syy.sum() - 2.0 * cxy.sum());

    // d(loss)/dY for the SE kernel:
    //   yy term:   2 sum_{j != m} k(y_m,y_j) (y_j - y_m) / h
    //   xy term:  +2 sum_{i != m} k(x_i,y_m) (y_m - x_i) / h
    Matrix Gy_t = Gyy_t - Gxy_t;
    Gy_t += Yt * (cxy - syy).asDiagonal();
    Gy_t *= 2.0 * scale * inv_h;

    // Chain through Y = X A and A = W D W^T.
    const Matrix Ga = (Gy_t * Xbatch).transpose();
    Matrix grad_W = (Ga + Ga.transpose()) * W * signs.asDiagonal();

    double loss = data_loss;
    if (ortho_penalty_weight > 0.0) {
        auto [pen, pen_grad] = ortho_penalty(W);
        loss += ortho_penalty_weight * pen;
        grad_W += ortho_penalty_weight * pen_grad;
    }
    (void)d;
    return {loss, std::move(grad_W)};
}

FinetuneTrace finetune(const Matrix& X, const Vector& signs, const Matrix& W_init,
                       const FinetuneConfig& config, Rng& rng) {
    const Index n = X.rows(), d = X.cols();
    if (W_init.rows() != d || W_init.cols() != d)
        throw std::invalid_argument("finetune: W_init shape mismatch");
    if ((W_init.transpose() * W_init - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-6)
        throw std::invalid_argument("finetune: W_init not orthonormal");
    if (config.momentum < 0 || config.momentum >= 1)
        throw std::invalid_argument("finetune: momentum must be in [0,1)");

    const Index batch = std::min(config.batch, n);
    double lr = config.learning_rate;

    FinetuneTrace trace;
    for (int attempt = 0; attempt <= config.max_restarts; ++attempt) {
        Matrix W = W_init;
        Matrix velocity = Matrix::Zero(d, d);
        std::vector<double> losses, lrs;
        Matrix grad;
        bool failed = false;
        Rng attempt_rng = rng.split(static_cast<std::uint64_t>(attempt));

        std::vector<Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Index{0});

        for (int epoch = 0; epoch < config.epochs && !failed; ++epoch) {
            shuffle_indices(perm, attempt_rng);
            double epoch_loss = 0.0;
            Index batches = 0;
            for (Index start = 0; start + batch <= n; start += batch, ++batches) {
                Matrix Xb(batch, d);
                for (Index i = 0; i < batch; ++i)
                    Xb.row(i) = X.row(perm[static_cast<std::size_t>(start + i)]);
                auto [loss, g] = mmd_loss_grad(Xb, W, signs, config.bandwidth,
                                               config.ortho_penalty_weight);
                if (!std::isfinite(loss) || !g.allFinite() || !W.allFinite()) {
                    failed = true;
                    break;
                }
                velocity = config.momentum * velocity - lr * g;
                W += velocity;
                epoch_loss += loss;
                grad = std::move(g);
            }
            if (failed || batches == 0 || !W.allFinite()) {
                failed = true;
                break;
            }
            losses.push_back(epoch_loss / static_cast<double>(batches));
            lrs.push_back(lr);
        }

        if (!failed) {
            trace.loss = std::move(losses);
            trace.learning_rates = std::move(lrs);
            trace.restarts = attempt;
            trace.W = std::move(W);
            trace.final_grad_norm = grad.size() ? grad.norm() : 0.0;
            return trace;
        }
        lr *= config.lr_backoff;
    }
    throw numeric_instability_error("finetune: max_restarts exhausted");
}

void write_trace_csv(std::ostream& out, const FinetuneTrace& trace) {
    out << std::setprecision(17) << "epoch,loss,lr,restarts\n";
    for (std::size_t e = 0; e < trace.loss.size(); ++e)
        out << e << "," << trace.loss[e] << "," << trace.learning_rates[e] << "," << trace.restarts
            << "\n";
}

}  // namespace symdisc
