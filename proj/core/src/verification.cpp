// Copyright 2026 The octsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "octsynth/error.hpp"
#include "octsynth/metrics.hpp"

namespace octsynth {

void ScoreSet::validate() const {
  if (genuine.empty() || impostor.empty()) {
    throw ValidationError("score set needs genuine and impostor scores");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(genuine) || !finite(impostor)) throw ValidationError("scores must be finite");
}

std::vector<RocPoint> roc_points(const ScoreSet& s) {
  s.validate();
  std::vector<double> g = s.genuine, im = s.impostor;
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());

  std::vector<double> thresholds;
  thresholds.reserve(g.size() + im.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), g.begin(), g.end());
  thresholds.insert(thresholds.end(), im.begin(), im.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double ng = static_cast<double>(g.size());
  const double ni = static_cast<double>(im.size());
  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below_g = std::lower_bound(g.begin(), g.end(), t) - g.begin();
    const auto below_i = std::lower_bound(im.begin(), im.end(), t) - im.begin();
    out.push_back({(ni - static_cast<double>(below_i)) / ni, static_cast<double>(below_g) / ng, t});
  }
  return out;
}

double eer(const ScoreSet& s) {
  const auto roc = roc_points(s);
  // The first point has FAR = 1, FRR = 0 and the last FAR = 0, FRR = 1, so
  // the sign of FAR - FRR always changes somewhere.
  for (std::size_t i = 1; i < roc.size(); ++i) {
    const double d_cur = roc[i].far - roc[i].frr;
    if (d_cur > 0.0) continue;
    const double d_prev = roc[i - 1].far - roc[i - 1].frr;
    const double a = d_prev / (d_prev - d_cur);
    return roc[i - 1].far + a * (roc[i].far - roc[i - 1].far);
  }
  return roc.back().far;
}

double tar_at_far(const ScoreSet& s, double far_target) {
  if (!(far_target > 0.0 && far_target < 1.0)) {
    throw ValidationError("far_target must lie in (0, 1)");
  }
  const auto roc = roc_points(s);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    if (roc[i].far > far_target) continue;
    const auto& p = roc[i - 1];
    const auto& c = roc[i];
    // p.far > far_target >= c.far
    const double a = (p.far - far_target) / (p.far - c.far);
    const double frr = p.frr + a * (c.frr - p.frr);
    return 1.0 - frr;
  }
  return 0.0;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw ValidationError("cosine needs equal, non-empty vectors");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double den = std::sqrt(aa) * std::sqrt(bb);
  return den > 0.0 ? ab / den : 0.0;
}

ScoreSet all_pairs_scores(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels) {
  if (embeddings.size() != labels.size()) throw ValidationError("one label per embedding");
  ScoreSet s;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      const double c = cosine_similarity(embeddings[i], embeddings[j]);
      (labels[i] == labels[j] ? s.genuine : s.impostor).push_back(c);
    }
  }
  return s;
}

void write_scores(const ScoreSet& s, const std::filesystem::path& path) {
  std::ostringstream os;
  os.precision(17);
  for (double v : s.genuine) os << "genuine " << v << '\n';
  for (double v : s.impostor) os << "impostor " << v << '\n';
  const std::string text = os.str();
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ScoreSet read_scores(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ScoreSet s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    double v = 0.0;
    if (!(ls >> tag >> v)) {
      throw FormatError("bad score line", path.string() + ":" + std::to_string(lineno));
    }
    if (tag == "genuine") {
      s.genuine.push_back(v);
    } else if (tag == "impostor") {
      s.impostor.push_back(v);
    } else {
      throw FormatError("bad score line", path.string() + ":" + std::to_string(lineno));
    }
  }
  return s;
}

}  // namespace octsynth
