//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/numerics/checkpoint.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dualretro {
namespace {
constexpr const char *kMagic = "dualretro-checkpoint";
constexpr int kVersion = 1;

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hexfloat(const std::string &tok) {
  char *end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw CheckpointError("bad number in checkpoint: " + tok);
  return v;
}

std::string expect_word(std::istream &is, const char *word) {
  std::string tok;
  if (!(is >> tok) || tok != word)
    throw CheckpointError(std::string("checkpoint: expected '") + word
                          + "', got '" + tok + "'");
  return tok;
}

int read_count(std::istream &is) {
  long long n = -1;
  if (!(is >> n) || n < 0 || n > (1LL << 30))
    throw CheckpointError("checkpoint: bad count");
  return static_cast<int>(n);
}
}  // namespace

void write_checkpoint(std::ostream &os, const Checkpoint &ckpt) {
  os << kMagic << ' ' << kVersion << '\n';
  os << "meta " << ckpt.meta.size() << '\n';
  for (const auto &[key, value]: ckpt.meta) {
    if (key.empty() || key.find_first_of(" \t\n") != std::string::npos
        || value.find('\n') != std::string::npos)
      throw CheckpointError("checkpoint: unsupported metadata entry " + key);
    os << key << ' ' << value << '\n';
  }

  const ParameterSet &params = ckpt.params;
  os << "params " << params.size() << '\n';
  for (int p = 0; p < params.size(); ++p) {
    const Tensor &t = params.value(p);
    os << params.name(p) << ' ' << t.ndim();
    for (int d: t.shape())
      os << ' ' << d;
    os << '\n';
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k > 0)
        os << ' ';
      os << hexfloat(t[k]);
    }
    os << '\n';
  }
  os << "end\n";
}

Checkpoint read_checkpoint(std::istream &is) {
  Checkpoint ckpt;
  expect_word(is, kMagic);
  int version = 0;
  if (!(is >> version) || version != kVersion)
    throw CheckpointError("checkpoint: unsupported version "
                          + std::to_string(version));

  expect_word(is, "meta");
  const int nmeta = read_count(is);
  std::string line;
  std::getline(is, line);
  for (int i = 0; i < nmeta; ++i) {
    if (!std::getline(is, line))
      throw CheckpointError("checkpoint: truncated metadata");
    const auto sp = line.find(' ');
    if (sp == std::string::npos)
      throw CheckpointError("checkpoint: bad metadata line: " + line);
    ckpt.meta[line.substr(0, sp)] = line.substr(sp + 1);
  }

  expect_word(is, "params");
  const int nparams = read_count(is);
  for (int p = 0; p < nparams; ++p) {
    std::string name;
    int ndim = 0;
    if (!(is >> name >> ndim) || ndim < 0 || ndim > 3)
      throw CheckpointError("checkpoint: bad parameter header");
    std::vector<int> shape(ndim);
    for (int &d: shape)
      d = read_count(is);

    Tensor t(shape);
    std::string tok;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!(is >> tok))
        throw CheckpointError("checkpoint: truncated values for " + name);
      t[k] = parse_hexfloat(tok);
    }
    ckpt.params.add(name, std::move(t));
  }
  expect_word(is, "end");
  return ckpt;
}

void save_checkpoint(const std::string &path, const Checkpoint &ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw CheckpointError("cannot open for writing: " + path);
  write_checkpoint(os, ckpt);
  if (!os)
    throw CheckpointError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw CheckpointError("cannot open checkpoint: " + path);
  return read_checkpoint(is);
}

}  // namespace dualretro
