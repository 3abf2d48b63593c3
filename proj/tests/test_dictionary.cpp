#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "sparseret/dictionary.hpp"
#include "sparseret/error.hpp"
#include "test_support.hpp"

using namespace sparseret;

namespace {

FeatureSet columns_as_set(const Eigen::MatrixXd& data) {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < data.cols(); ++i) ids.push_back("x" + std::to_string(i));
  return FeatureSet(static_cast<std::size_t>(data.rows()), data, ids);
}

void expect_canonical(const Dictionary& dict) {
  for (std::size_t j = 0; j < dict.k(); ++j) {
    const auto atom = dict.atoms().col(static_cast<Eigen::Index>(j));
    EXPECT_NEAR(atom.norm(), 1.0, 1e-10);
    Eigen::Index big = 0;
    atom.cwiseAbs().maxCoeff(&big);
    EXPECT_GT(atom(big), 0.0);
  }
}

// Greedy matching: repeatedly pair the remaining (learned, true) atoms with
// the largest |inner product|.
int recovered_atoms(const Eigen::MatrixXd& learned, const Eigen::MatrixXd& truth, double threshold) {
  Eigen::MatrixXd corr = (learned.transpose() * truth).cwiseAbs();
  int count = 0;
  for (Eigen::Index step = 0; step < std::min(learned.cols(), truth.cols()); ++step) {
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    const double best = corr.maxCoeff(&r, &c);
    if (best > threshold) ++count;
    corr.row(r).setConstant(-1.0);
    corr.col(c).setConstant(-1.0);
  }
  return count;
}

DictLearnConfig learn_config(std::size_t k, std::size_t iterations, std::uint64_t seed) {
  DictLearnConfig c;
  c.k = k;
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Canonical, SignAndNorm) {
  Eigen::VectorXd v(3);
  v << 0.5, -2.0, 1.0;
  ASSERT_TRUE(canonicalize_atom(v));
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  EXPECT_GT(v(1), 0.0);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  EXPECT_FALSE(canonicalize_atom(zero));
}

TEST(DictionaryType, RejectsBrokenAtoms) {
  Eigen::MatrixXd a(2, 1);
  a << 2, 0;
  EXPECT_THROW(Dictionary(a, DictMethod::kKmeans, 0, {}), NumericError);
  a << -1, 0;
  EXPECT_THROW(Dictionary(a, DictMethod::kKmeans, 0, {}), NumericError);
  a << 1, 0;
  EXPECT_NO_THROW(Dictionary(a, DictMethod::kKmeans, 0, {}));
}

TEST(Kmeans, SeparatedClusters) {
  Eigen::MatrixXd data(2, 10);
  for (int i = 0; i < 5; ++i) data.col(i) = Eigen::Vector2d(1, 0);
  for (int i = 5; i < 10; ++i) data.col(i) = Eigen::Vector2d(0, 1);
  const auto dict = kmeans_learn(columns_as_set(data), learn_config(2, 10, 3));
  std::set<std::pair<double, double>> atoms;
  for (Eigen::Index j = 0; j < 2; ++j) atoms.insert({dict.atoms()(0, j), dict.atoms()(1, j)});
  EXPECT_EQ(atoms, (std::set<std::pair<double, double>>{{1, 0}, {0, 1}}));
  EXPECT_EQ(dict.train_log().back(), 0.0);
}

TEST(Kmeans, SingletonClusters) {
  Rng rng(1);
  Eigen::MatrixXd data(4, 6);
  for (Eigen::Index i = 0; i < 6; ++i) data.col(i) = synthetic::gaussian_vector(rng, 4);
  const auto dict = kmeans_learn(columns_as_set(data), learn_config(6, 5, 0));
  for (Eigen::Index i = 0; i < 6; ++i) {
    Eigen::VectorXd expected = data.col(i);
    canonicalize_atom(expected);
    double best = 0.0;
    for (Eigen::Index j = 0; j < 6; ++j) best = std::max(best, dict.atoms().col(j).dot(expected));
    EXPECT_NEAR(best, 1.0, 1e-12) << i;
  }
}

TEST(Kmeans, DeterministicAndMonotone) {
  const auto data = synthetic::clustered_dataset(6, 15, 12, 0.3, 4);
  const auto a = kmeans_learn(data.features, learn_config(5, 20, 9));
  const auto b = kmeans_learn(data.features, learn_config(5, 20, 9));
  EXPECT_EQ(a.atoms(), b.atoms());
  EXPECT_EQ(a.train_log(), b.train_log());
  for (std::size_t i = 1; i < a.train_log().size(); ++i) EXPECT_LE(a.train_log()[i], a.train_log()[i - 1]);
  expect_canonical(a);
  const auto other = kmeans_learn(data.features, learn_config(5, 20, 10));
  EXPECT_NE(a.atoms(), other.atoms());
}

TEST(Kmeans, Errors) {
  const auto data = synthetic::clustered_dataset(2, 3, 4, 0.1, 1);
  EXPECT_THROW(kmeans_learn(data.features, learn_config(7, 5, 0)), InputError);
  const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(3, 5);
  EXPECT_THROW(kmeans_learn(columns_as_set(same), learn_config(2, 5, 0)), InputError);
  EXPECT_NO_THROW(kmeans_learn(columns_as_set(same), learn_config(1, 5, 0)));
}

TEST(Rank1, ExactRankOne) {
  Rng rng(2);
  Eigen::VectorXd u = synthetic::gaussian_vector(rng, 5).normalized();
  Eigen::VectorXd v = synthetic::gaussian_vector(rng, 7).normalized();
  canonicalize_atom(u);
  const Eigen::MatrixXd e = 3.0 * u * v.transpose();
  const auto r = rank1_approx(e);
  EXPECT_NEAR(r.sigma, 3.0, 1e-10);
  EXPECT_LE((r.u - u).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((r.v - v).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rank1, MatchesSvdOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd e(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) e.data()[i] = synthetic::gaussian(rng);
    const auto r = rank1_approx(e);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    EXPECT_NEAR(r.sigma, svd.singularValues()(0), 1e-8) << trial;
    EXPECT_NEAR(r.u.norm(), 1.0, 1e-12);
    EXPECT_NEAR(r.v.norm(), 1.0, 1e-12);
    EXPECT_LE((r.sigma * r.u * r.v.transpose() -
               svd.singularValues()(0) * svd.matrixU().col(0) * svd.matrixV().col(0).transpose())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-6)
        << trial;
  }
}

TEST(Rank1, RepeatedLeadingSingularValue) {
  Rng rng(4);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(
                                Eigen::MatrixXd::NullaryExpr(4, 4, [&] { return synthetic::gaussian(rng); }))
                                .householderQ();
  const Eigen::Vector4d s(2.0, 2.0, 0.5, 0.1);
  const Eigen::MatrixXd e = q * s.asDiagonal() * q.transpose();
  const auto r = rank1_approx(e);
  EXPECT_NEAR(r.sigma, 2.0, 1e-8);
  EXPECT_NEAR((e * r.v - r.sigma * r.u).norm(), 0.0, 1e-7);
}

TEST(Rank1, UsesHintAndRejectsZero) {
  Rng rng(5);
  Eigen::MatrixXd e(6, 4);
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = synthetic::gaussian(rng);
  const Eigen::VectorXd hint = synthetic::gaussian_vector(rng, 6);
  EXPECT_NEAR(rank1_approx(e, &hint).sigma, rank1_approx(e).sigma, 1e-8);
  EXPECT_THROW(rank1_approx(Eigen::MatrixXd::Zero(3, 3)), NumericError);
}

TEST(Ksvd, RankOneData) {
  Rng rng(6);
  Eigen::VectorXd u = synthetic::gaussian_vector(rng, 8).normalized();
  Eigen::MatrixXd data(8, 20);
  for (Eigen::Index i = 0; i < 20; ++i) data.col(i) = (synthetic::gaussian(rng) + 0.1) * u;
  auto config = learn_config(1, 10, 0);
  config.inner_coder.sparsity = 1;
  const auto dict = ksvd_learn(columns_as_set(data), config);
  canonicalize_atom(u);
  EXPECT_LE((dict.atoms().col(0) - u).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(dict.train_log().back(), 1e-8);
}

TEST(Ksvd, SyntheticRecoveryAndLog) {
  Rng rng(7);
  const Eigen::MatrixXd truth = synthetic::random_unit_dictionary(rng, 20, 30);
  const Eigen::MatrixXd signals = synthetic::sparse_signals(rng, truth, 600, 3);
  auto config = learn_config(30, 50, 11);
  config.inner_coder.sparsity = 3;
  const auto dict = ksvd_learn(columns_as_set(signals), config);
  expect_canonical(dict);
  EXPECT_GE(recovered_atoms(dict.atoms(), truth, 0.99), 27);
  const auto& log = dict.train_log();
  ASSERT_EQ(log.size(), 51u);
  EXPECT_LT(log.back(), 0.1 * log.front());
  int non_increasing = 0;
  for (std::size_t i = 1; i < log.size(); ++i) non_increasing += log[i] <= log[i - 1] ? 1 : 0;
  EXPECT_GE(non_increasing, 45);
}

TEST(Ksvd, DeterministicAcrossWorkers) {
  const auto data = synthetic::clustered_dataset(5, 20, 16, 0.2, 2);
  auto config = learn_config(8, 5, 3);
  config.inner_coder.sparsity = 3;
  const auto a = ksvd_learn(data.features, config);
  config.workers = 3;
  const auto b = ksvd_learn(data.features, config);
  EXPECT_EQ(a.atoms(), b.atoms());
  EXPECT_EQ(a.train_log(), b.train_log());
  EXPECT_LE(a.train_log().back(), a.train_log().front());
}

TEST(Ksvd, ZeroCodesAdviseSmallerLambda) {
  const auto data = synthetic::clustered_dataset(3, 5, 6, 0.1, 3);
  auto config = learn_config(3, 2, 0);
  config.inner_coder = CoderConfig::defaults(CoderMethod::kLasso);
  config.inner_coder.lambda = 100.0;
  try {
    ksvd_learn(l2_normalize(data.features), config);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda"), std::string::npos);
  }
}

TEST(DictionaryFile, RoundTrip) {
  const auto data = synthetic::clustered_dataset(4, 6, 10, 0.2, 5);
  const auto dict = kmeans_learn(data.features, learn_config(4, 10, 2));
  const auto dir = testsupport::scratch_dir("dictfile");
  write_dictionary(dict, dir / "d.sdic");
  const auto back = load_dictionary(dir / "d.sdic");
  EXPECT_EQ(back.m(), dict.m());
  EXPECT_EQ(back.k(), dict.k());
  EXPECT_EQ(back.method(), DictMethod::kKmeans);
  EXPECT_EQ(back.seed(), 2u);
  EXPECT_EQ(back.train_log(), dict.train_log());
  EXPECT_LE((back.atoms() - dict.atoms()).cwiseAbs().maxCoeff(), 1e-6);
  expect_canonical(back);

  write_dictionary(back, dir / "e.sdic");
  EXPECT_EQ(testsupport::slurp(dir / "d.sdic"), testsupport::slurp(dir / "e.sdic"));

  std::string bytes = testsupport::slurp(dir / "d.sdic");
  bytes.pop_back();
  {
    std::ofstream out(dir / "bad.sdic", std::ios::binary);
    out << bytes;
  }
  EXPECT_THROW(load_dictionary(dir / "bad.sdic"), InputError);
}
