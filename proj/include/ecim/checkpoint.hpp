#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecim/mlp.hpp"

namespace ecim {

// Versioned text checkpoint. Doubles are written as C hexfloats ("%a"), which
// round-trip bit-exactly through strtod, so save -> load -> save produces an
// identical file.
class Checkpoint {
 public:
  static constexpr int kVersion = 1;

  void add_matrix(const std::string& name, const Matrix& m) { matrices_[name] = m; }

  void add_vector(const std::string& name, std::span<const double> v) {
    Matrix m(1, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), m.data.begin());
    matrices_[name] = std::move(m);
  }

  void add_scalar(const std::string& name, double v) { add_vector(name, std::span<const double>(&v, 1)); }

  void add_tag(const std::string& name, const std::string& value) { tags_[name] = value; }

  bool has(const std::string& name) const {
    return matrices_.count(name) > 0 || tags_.count(name) > 0;
  }

  const Matrix& matrix(const std::string& name) const {
    auto it = matrices_.find(name);
    if (it == matrices_.end()) throw std::out_of_range("checkpoint: missing tensor " + name);
    return it->second;
  }

  std::vector<double> vector(const std::string& name) const { return matrix(name).data; }

  double scalar(const std::string& name) const {
    const Matrix& m = matrix(name);
    if (m.data.size() != 1) throw std::runtime_error("checkpoint: " + name + " is not a scalar");
    return m.data[0];
  }

  const std::string& tag(const std::string& name) const {
    auto it = tags_.find(name);
    if (it == tags_.end()) throw std::out_of_range("checkpoint: missing tag " + name);
    return it->second;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
    out << "ecim-checkpoint " << kVersion << "\n";
    for (const auto& [name, value] : tags_) out << "tag " << name << " " << value << "\n";
    char buf[48];
    for (const auto& [name, m] : matrices_) {
      out << "tensor " << name << " " << m.rows << " " << m.cols << "\n";
      for (int r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (int c = 0; c < m.cols; ++c) {
          std::snprintf(buf, sizeof(buf), "%a", row[c]);
          out << buf << (c + 1 == m.cols ? "" : " ");
        }
        out << "\n";
      }
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
  }

  static Checkpoint load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    std::string header;
    int version = -1;
    in >> header >> version;
    if (header != "ecim-checkpoint") throw std::runtime_error("checkpoint: bad header in " + path.string());
    if (version != kVersion) {
      throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version) + " in " + path.string());
    }
    Checkpoint ckpt;
    std::string kind;
    while (in >> kind) {
      if (kind == "tag") {
        std::string name, value;
        in >> name >> value;
        ckpt.tags_[name] = value;
      } else if (kind == "tensor") {
        std::string name;
        int rows = 0, cols = 0;
        in >> name >> rows >> cols;
        if (!in || rows < 0 || cols < 0) throw std::runtime_error("checkpoint: bad tensor header in " + path.string());
        Matrix m(rows, cols);
        std::string token;
        for (std::size_t i = 0; i < m.data.size(); ++i) {
          in >> token;
          char* end = nullptr;
          m.data[i] = std::strtod(token.c_str(), &end);
          if (end == token.c_str()) throw std::runtime_error("checkpoint: bad value in " + path.string());
        }
        ckpt.matrices_[name] = std::move(m);
      } else {
        throw std::runtime_error("checkpoint: unknown record '" + kind + "' in " + path.string());
      }
    }
    return ckpt;
  }

 private:
  std::map<std::string, Matrix> matrices_;
  std::map<std::string, std::string> tags_;
};

inline std::string activation_name(Activation a) {
  return a == Activation::kTanh ? "tanh" : "identity";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw std::runtime_error("checkpoint: unknown activation " + s);
}

// Stores an MLP under `prefix` as layer tensors plus activation tags.
inline void add_mlp(Checkpoint& ckpt, const std::string& prefix, const MlpParams& params) {
  ckpt.add_scalar(prefix + ".layer_count", static_cast<double>(params.layers.size()));
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& l = params.layers[i];
    const std::string base = prefix + ".layer" + std::to_string(i);
    ckpt.add_matrix(base + ".w", l.weight);
    ckpt.add_vector(base + ".b", l.bias);
    ckpt.add_tag(base + ".act", activation_name(l.act));
  }
}

inline MlpParams read_mlp(const Checkpoint& ckpt, const std::string& prefix) {
  const int count = static_cast<int>(ckpt.scalar(prefix + ".layer_count"));
  MlpParams params;
  for (int i = 0; i < count; ++i) {
    const std::string base = prefix + ".layer" + std::to_string(i);
    MlpLayer layer;
    layer.weight = ckpt.matrix(base + ".w");
    layer.bias = ckpt.vector(base + ".b");
    layer.act = activation_from_name(ckpt.tag(base + ".act"));
    params.layers.push_back(std::move(layer));
  }
  return params;
}

}  // namespace ecim
