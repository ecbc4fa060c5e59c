#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ids/error.hpp"
#include "ids/labels.hpp"
#include "ids/matrix.hpp"
#include "ids/random.hpp"
#include "ids/text.hpp"

namespace ids::kmeans {

enum class Disposition : unsigned char { benign, anomalous };

inline std::string_view disposition_name(Disposition d) { return d == Disposition::benign ? "benign" : "anomalous"; }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) { return std::sqrt(squared_distance(a, b)); }

// Nearest centroid by squared Euclidean distance; ties to the lower index.
inline std::size_t nearest(const Matrix& centroids, std::span<const double> row) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c), row);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

struct KMeansModel {
  Matrix centroids;
  std::vector<Disposition> disposition;
  double inertia = 0.0;
  std::size_t iterations = 0;
  // Inertia of every assignment step, in order; the last entry equals `inertia`.
  std::vector<double> inertia_history;

  std::size_t k() const noexcept { return centroids.rows(); }
  std::size_t dim() const noexcept { return centroids.cols(); }

  std::size_t assign(std::span<const double> row) const {
    if (row.size() != dim()) throw invalid_argument("row width does not match centroid width");
    return nearest(centroids, row);
  }
};

// Roulette seeding: the first centre is a uniform draw; each further centre is
// picked by drawing lambda in [0, Sum D) and subtracting D(x_i) in index order
// until lambda drops below zero, where D is the (unsquared) distance to the
// nearest chosen centre.
inline std::vector<std::size_t> init_centroid_indices(const Matrix& data, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw invalid_argument("cluster count must be at least 1");
  if (k > data.rows()) throw invalid_argument("cluster count exceeds row count");
  Rng rng(seed);
  std::vector<std::size_t> chosen{rng.index(data.rows())};
  std::vector<double> d(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) d[i] = distance(data.row(i), data.row(chosen[0]));
  while (chosen.size() < k) {
    double sum = 0.0;
    for (double v : d) sum += v;
    std::size_t pick = data.rows();
    if (sum > 0.0) {
      double lambda = rng.uniform() * sum;
      for (std::size_t i = 0; i < d.size(); ++i) {
        lambda -= d[i];
        if (lambda < 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == data.rows()) {
        // rounding left lambda at or above zero: take the last positive section
        for (std::size_t i = d.size(); i-- > 0;) {
          if (d[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // every remaining point coincides with a centre
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    for (std::size_t i = 0; i < data.rows(); ++i) d[i] = std::min(d[i], distance(data.row(i), data.row(pick)));
  }
  return chosen;
}

inline Matrix init_centroids(const Matrix& data, std::size_t k, std::uint64_t seed) {
  auto idx = init_centroid_indices(data, k, seed);
  return data.select_rows(idx);
}

struct LloydConfig {
  std::size_t max_iter = 100;
  double tol = 1e-4;
};

namespace detail {

inline double assign_all(const Matrix& data, const Matrix& centroids, std::vector<std::size_t>& assignment) {
  assignment.resize(data.rows());
  double inertia = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    assignment[i] = nearest(centroids, data.row(i));
    inertia += squared_distance(data.row(i), centroids.row(assignment[i]));
  }
  return inertia;
}

}  // namespace detail

// Alternating assignment / mean update. An emptied cluster is reseeded at the
// point farthest from its own centroid.
inline KMeansModel lloyd(const Matrix& data, Matrix centroids, const LloydConfig& config = {}) {
  if (config.max_iter < 1) throw invalid_argument("max_iter must be at least 1");
  if (centroids.empty() || centroids.cols() != data.cols()) throw invalid_argument("centroids do not match data width");
  if (data.empty()) throw invalid_argument("k-means needs data");
  const std::size_t k = centroids.rows();
  const std::size_t dim = data.cols();
  KMeansModel model;
  std::vector<std::size_t> assignment;
  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    model.inertia_history.push_back(detail::assign_all(data, centroids, assignment));
    Matrix next(k, dim);
    std::vector<std::size_t> members(k, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      auto row = data.row(i);
      auto sum = next.row(assignment[i]);
      for (std::size_t j = 0; j < dim; ++j) sum[j] += row[j];
      ++members[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto r = next.row(c);
      if (members[c] > 0) {
        for (auto& v : r) v /= static_cast<double>(members[c]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        const double d = squared_distance(data.row(i), centroids.row(assignment[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      auto src = data.row(far);
      std::copy(src.begin(), src.end(), r.begin());
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) movement = std::max(movement, distance(centroids.row(c), next.row(c)));
    centroids = std::move(next);
    model.iterations = iter + 1;
    if (movement < config.tol) break;
  }
  model.inertia = detail::assign_all(data, centroids, assignment);
  model.inertia_history.push_back(model.inertia);
  model.centroids = std::move(centroids);
  model.disposition.assign(k, Disposition::anomalous);
  return model;
}

inline std::vector<std::size_t> assign_all(const KMeansModel& model, const Matrix& data) {
  std::vector<std::size_t> out;
  detail::assign_all(data, model.centroids, out);
  return out;
}

// Benign iff the cluster's majority true label is Normal (ties favour the
// lower class index, i.e. Normal); empty clusters are anomalous.
inline std::vector<Disposition> label_clusters(const KMeansModel& model, std::span<const std::size_t> assignments,
                                               std::span<const ClassLabel> labels) {
  if (assignments.size() != labels.size()) throw invalid_argument("assignment count differs from label count");
  std::vector<std::array<std::size_t, kNumClasses>> hist(model.k());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (assignments[i] >= model.k()) throw invalid_argument("assignment out of range");
    ++hist[assignments[i]][index_of(labels[i])];
  }
  std::vector<Disposition> out(model.k(), Disposition::anomalous);
  for (std::size_t c = 0; c < model.k(); ++c) {
    std::size_t best = 0, total = 0;
    for (std::size_t l = 0; l < kNumClasses; ++l) {
      total += hist[c][l];
      if (hist[c][l] > hist[c][best]) best = l;
    }
    if (total > 0 && best == index_of(ClassLabel::Normal)) out[c] = Disposition::benign;
  }
  return out;
}

inline void write_model(std::ostream& os, const KMeansModel& model) {
  os << "kmeans 1\n";
  os << "K " << model.k() << " dim " << model.dim() << '\n';
  for (std::size_t c = 0; c < model.k(); ++c) {
    os << "centroid";
    for (double v : model.centroids.row(c)) os << ' ' << text::format_double(v);
    os << '\n';
  }
  os << "disposition";
  for (auto d : model.disposition) os << ' ' << disposition_name(d);
  os << '\n';
  os << "inertia " << text::format_double(model.inertia) << '\n';
}

inline KMeansModel read_model(std::istream& is) {
  std::string tag, version, s;
  if (!(is >> tag >> version) || tag != "kmeans" || version != "1") throw schema_error("not a version 1 k-means model");
  std::size_t k = 0, dim = 0;
  std::string kk, dd;
  if (!(is >> kk >> k >> dd >> dim) || kk != "K" || dd != "dim" || k == 0) throw schema_error("bad k-means header");
  KMeansModel model;
  model.centroids = Matrix(k, dim);
  for (std::size_t c = 0; c < k; ++c) {
    if (!(is >> tag) || tag != "centroid") throw schema_error("bad centroid line");
    for (auto& v : model.centroids.row(c)) {
      is >> s;
      auto d = text::parse_double(s);
      if (!d) throw schema_error("bad centroid value");
      v = *d;
    }
  }
  if (!(is >> tag) || tag != "disposition") throw schema_error("bad disposition line");
  for (std::size_t c = 0; c < k; ++c) {
    is >> s;
    if (s == "benign") {
      model.disposition.push_back(Disposition::benign);
    } else if (s == "anomalous") {
      model.disposition.push_back(Disposition::anomalous);
    } else {
      throw schema_error("bad disposition '" + s + "'");
    }
  }
  if (!(is >> tag >> s) || tag != "inertia") throw schema_error("bad inertia line");
  auto inertia = text::parse_double(s);
  if (!inertia) throw schema_error("bad inertia value");
  model.inertia = *inertia;
  return model;
}

}  // namespace ids::kmeans
