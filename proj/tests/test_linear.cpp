#include "fvalue/linear.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fvalue;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n;
    Matrix X(rows, cols);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
    return X;
}

}  // namespace

TEST(Ols, ExactLine) {
    Matrix X(5, 1);
    X << 1, 2, 3, 4, 5;
    const Vector y = 2.0 * X.col(0);
    const auto fit = ols_fit(X, y);
    EXPECT_NEAR(fit.coefficients(0), 2.0, 1e-14);
    EXPECT_NEAR(fit.residual_variance, 0.0, 1e-24);
    EXPECT_FALSE(fit.has_intercept);
}

TEST(Ols, MatchesNormalEquations) {
    Matrix X(6, 2);
    X << 1, 0.5, 2, -1, 3, 4, 4, 2, 5, 0, 6, 1.5;
    Vector y(6);
    y << 1.2, -0.7, 3.3, 2.9, 4.1, 5.0;
    const Vector oracle = (X.transpose() * X).inverse() * (X.transpose() * y);
    const auto fit = ols_fit(X, y);
    EXPECT_LT((fit.coefficients - oracle).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ols, DuplicatedColumnIsMinimumNorm) {
    Matrix X(8, 2);
    for (int i = 0; i < 8; ++i) X(i, 0) = X(i, 1) = i + 1.0;
    const Vector y = 2.0 * X.col(0);
    const auto fit = ols_fit(X, y);
    EXPECT_TRUE(fit.rank_deficient);
    EXPECT_NEAR(fit.coefficients(0), 1.0, 1e-10);
    EXPECT_NEAR(fit.coefficients(1), 1.0, 1e-10);
}

TEST(Ols, Preconditions) {
    EXPECT_THROW(ols_fit(Matrix::Ones(2, 3), Vector::Ones(2)), ValidationError);
    EXPECT_THROW(ols_fit(Matrix::Ones(4, 2), Vector::Ones(3)), ValidationError);
    Matrix X = Matrix::Ones(4, 1);
    X(2, 0) = std::nan("");
    EXPECT_THROW(ols_fit(X, Vector::Ones(4)), ValidationError);
}

TEST(Lasso, ZeroPenaltyEqualsOls) {
    std::mt19937_64 rng(1);
    const Matrix X = random_matrix(rng, 200, 10);
    Vector beta(10);
    beta << 1.5, -2.0, 0.0, 0.3, 4.0, -0.1, 0.0, 2.2, -3.3, 0.7;
    std::normal_distribution<double> n;
    Vector y = (X * beta).array() + 5.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.5 * n(rng);

    Matrix Xi(200, 11);
    Xi << Vector::Ones(200), X;
    const auto ols = ols_fit(Xi, y);
    const auto fit = lasso_fit(X, y, {0.0});
    EXPECT_LT((fit.coefficients - ols.coefficients.tail(10)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(fit.intercept, ols.coefficients(0), 1e-6);
}

TEST(Lasso, KillThreshold) {
    std::mt19937_64 rng(2);
    const Matrix X = random_matrix(rng, 80, 12);
    const Vector y = X.col(3) * 2.0 + X.col(7) - Vector::Constant(80, 3.0);
    const auto prob = StandardizedProblem::make(X, y);
    for (double mult : {1.0, 1.5, 10.0}) {
        const auto fit = lasso_fit(X, y, {prob.lambda_max() * mult});
        EXPECT_TRUE((fit.coefficients.array() == 0.0).all());
        EXPECT_NEAR(fit.intercept, y.mean(), 1e-12);
    }
    // Independent check of the kill value on the standardised design.
    const Matrix Z = (X.rowwise() - X.colwise().mean()).array().rowwise() /
                     ((X.rowwise() - X.colwise().mean()).colwise().squaredNorm() / 80.0).array().sqrt();
    const Vector yc = y.array() - y.mean();
    EXPECT_NEAR(prob.lambda_max(), (Z.transpose() * yc).cwiseAbs().maxCoeff() / 80.0, 1e-12);
}

TEST(Lasso, SingleRegressorSoftThreshold) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    Vector x(50), y(50);
    for (int i = 0; i < 50; ++i) {
        x(i) = n(rng);
        y(i) = 0.8 * x(i) + n(rng);
    }
    x = (x.array() - x.mean()).matrix();
    x /= std::sqrt(x.squaredNorm() / 50.0);
    const double b_ols = x.dot(y.array().matrix() - Vector::Constant(50, y.mean())) / 50.0;
    for (double lambda : {0.0, 0.1, 0.3, 0.5, 2.0}) {
        const double expected = std::copysign(std::max(std::abs(b_ols) - lambda, 0.0), b_ols);
        const auto fit = lasso_fit(x, y, {lambda});
        EXPECT_NEAR(fit.coefficients(0), expected, 1e-8) << "lambda " << lambda;
    }
}

TEST(Lasso, GridShape) {
    const auto g = log_lambda_grid(3.0);
    ASSERT_EQ(g.size(), 100u);
    EXPECT_EQ(g.front(), 3.0);
    EXPECT_NEAR(g.back(), 3e-4, 1e-15);
    for (size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i], g[i - 1]);
}

TEST(Lasso, PathStartsEmptyAndRespectsDegreesOfFreedom) {
    std::mt19937_64 rng(4);
    const Matrix X = random_matrix(rng, 40, 60);
    std::normal_distribution<double> n;
    Vector y = X.leftCols(30).rowwise().sum();
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.1 * n(rng);
    const auto prob = StandardizedProblem::make(X, y);
    const auto path = lasso_path(prob, log_lambda_grid(prob.lambda_max()));
    ASSERT_FALSE(path.empty());
    EXPECT_EQ(path.front().nonzero, 0);
    for (const auto& p : path) EXPECT_LE(p.nonzero + 1, 20);
}

TEST(Lasso, RecoversSparseSignal) {
    std::mt19937_64 rng(5);
    const Matrix X = random_matrix(rng, 300, 20);
    std::normal_distribution<double> n;
    Vector y = 3.0 * X.col(2) - 2.0 * X.col(11);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.3 * n(rng) + 10.0;
    const auto fit = lasso_fit_auto(X, y);
    EXPECT_NEAR(fit.coefficients(2), 3.0, 0.1);
    EXPECT_NEAR(fit.coefficients(11), -2.0, 0.1);
    EXPECT_NEAR(fit.intercept, 10.0, 0.1);
    EXPECT_GT(fit.lambda, 0.0);
}

TEST(Lasso, ConstantColumnStaysZero) {
    std::mt19937_64 rng(6);
    Matrix X = random_matrix(rng, 60, 3);
    X.col(1).setConstant(4.0);
    const Vector y = X.col(0) + X.col(2);
    const auto fit = lasso_fit(X, y, {0.0});
    EXPECT_EQ(fit.coefficients(1), 0.0);
    EXPECT_NEAR(fit.coefficients(0), 1.0, 1e-6);
}
