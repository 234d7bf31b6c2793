#include "colearn/compression/compressor.hpp"

#include <cmath>

#include "colearn/compression/bitstream.hpp"
#include "colearn/compression/codec.hpp"
#include "colearn/compression/quantize.hpp"
#include "colearn/compression/sparsify.hpp"
#include "colearn/error.hpp"

namespace colearn::compression {

namespace {

struct NamedScheme {
  Scheme scheme;
  const char* name;
};

constexpr NamedScheme kSchemes[] = {
    {Scheme::identity, "identity"},
    {Scheme::random_p, "random-p"},
    {Scheme::top_k, "top-k"},
    {Scheme::rand_k, "rand-k"},
    {Scheme::r_top_k, "r-top-k"},
    {Scheme::sync_mask, "sync-mask"},
    {Scheme::stochastic_uniform, "stochastic-uniform"},
    {Scheme::ternary, "ternary"},
    {Scheme::sign, "sign"},
    {Scheme::thresholded_1bit, "thresholded-1bit"},
    {Scheme::scaled_sign, "scaled-sign"},
    {Scheme::block_scaled_sign, "block-scaled-sign"},
};

void put_header(std::vector<std::uint8_t>& out, Scheme s, std::size_t d) {
  out.push_back(static_cast<std::uint8_t>(s));
  put_u32(out, static_cast<std::uint32_t>(d));
}

void put_sparse(std::vector<std::uint8_t>& out, const SparseUpdate& s) {
  const auto blob = encode_sparse(s, adaptive_block_size(s.dim, s.entries.size()));
  const auto bytes = to_bytes(blob);
  out.insert(out.end(), bytes.begin(), bytes.end());
}

void put_bits(std::vector<std::uint8_t>& out, const BitWriter& w) {
  const auto packed = pack_bits(w.bits());
  out.insert(out.end(), packed.begin(), packed.end());
}

void put_signs(std::vector<std::uint8_t>& out, const DenseVector& v) {
  BitWriter w;
  for (double x : v) w.put(!(x < 0.0));
  put_bits(out, w);
}

std::vector<bool> read_bits(ByteReader& r, std::size_t count) {
  const std::size_t start = r.offset();
  return unpack_bits(r.take((count + 7) / 8), count, start);
}

}  // namespace

std::string scheme_name(Scheme s) {
  for (const auto& n : kSchemes)
    if (n.scheme == s) return n.name;
  return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
  for (const auto& n : kSchemes)
    if (name == n.name) return n.scheme;
  return std::nullopt;
}

void CompressorSpec::validate(std::size_t d) const {
  COLEARN_REQUIRE(d >= 1, "compressor: dimension must be positive");
  switch (scheme) {
    case Scheme::top_k:
    case Scheme::rand_k:
      COLEARN_REQUIRE(k >= 1 && k <= d, "compressor: K must be in [1, d]");
      break;
    case Scheme::r_top_k:
      COLEARN_REQUIRE(k >= 1 && k <= r && r <= d, "compressor: need 1 <= K <= R <= d");
      break;
    case Scheme::random_p:
      COLEARN_REQUIRE(eps > 0.0 && std::isfinite(eps), "compressor: eps must be positive");
      break;
    case Scheme::sync_mask:
      COLEARN_REQUIRE(phi > 0.0 && phi <= 1.0, "compressor: phi must be in (0, 1]");
      COLEARN_REQUIRE(tau_max >= 1, "compressor: tau_max must be at least 1");
      COLEARN_REQUIRE(static_cast<double>(tau_max) * phi >= 1.0 - 1e-12 &&
                          sync_mask_block_count(d, phi) <= tau_max,
                      "compressor: infeasible sync-mask pair, tau_max * phi must be >= 1");
      break;
    case Scheme::stochastic_uniform:
      COLEARN_REQUIRE(levels >= 1, "compressor: L must be at least 1");
      break;
    case Scheme::block_scaled_sign:
      COLEARN_REQUIRE(blocks >= 1 && blocks <= d, "compressor: block count must be in [1, d]");
      break;
    default:
      break;
  }
}

bool CompressorSpec::is_mask_based() const noexcept {
  switch (scheme) {
    case Scheme::identity:
    case Scheme::top_k:
    case Scheme::r_top_k:
    case Scheme::sync_mask:
      return true;
    case Scheme::rand_k:
      return !rescale;
    default:
      return false;
  }
}

Message compress(const DenseVector& v, const CompressorSpec& spec, RngStream& rng, std::size_t round) {
  const std::size_t d = v.dim();
  spec.validate(d);
  if (!v.all_finite()) throw ContractViolation("compress: input has non-finite entries");
  Message msg;
  msg.scheme = spec.scheme;
  auto& out = msg.wire;
  put_header(out, spec.scheme, d);

  switch (spec.scheme) {
    case Scheme::identity:
      for (double x : v) put_f64(out, x);
      break;
    case Scheme::random_p:
      put_sparse(out, random_sparsify(v, spec.eps, rng));
      break;
    case Scheme::top_k:
      put_sparse(out, apply_mask(v, top_k_mask(v, spec.k)));
      break;
    case Scheme::rand_k: {
      SparseUpdate s = apply_mask(v, rand_k_mask(d, spec.k, rng));
      if (spec.rescale) {
        const double factor = static_cast<double>(d) / static_cast<double>(spec.k);
        for (auto& e : s.entries) e.value *= factor;
      }
      put_sparse(out, s);
      break;
    }
    case Scheme::r_top_k:
      put_sparse(out, apply_mask(v, r_top_k_mask(v, spec.r, spec.k, rng)));
      break;
    case Scheme::sync_mask:
      put_sparse(out, apply_mask(v, sync_mask_schedule(d, spec.phi, spec.tau_max, round)));
      break;
    case Scheme::stochastic_uniform: {
      const UniformLevels q = quant_stochastic_uniform_levels(v, spec.levels, rng);
      put_u32(out, q.levels);
      put_f64(out, q.norm);
      const unsigned width = bits_for_count(std::uint64_t{q.levels} + 1);
      BitWriter w;
      for (std::size_t i = 0; i < d; ++i) {
        w.put(q.sign[i] > 0);
        w.put_uint(q.level[i], width);
      }
      put_bits(out, w);
      break;
    }
    case Scheme::ternary: {
      const DenseVector t = quant_ternary(v, rng);
      const double gmax = v.norm_inf();
      put_f64(out, gmax);
      BitWriter w;
      for (double x : t) {
        w.put(x != 0.0);
        w.put(x < 0.0);
      }
      put_bits(out, w);
      break;
    }
    case Scheme::sign:
      put_signs(out, v);
      break;
    case Scheme::thresholded_1bit: {
      const auto bits = sign_quant(v, spec.threshold, SignMode::thresholded);
      RunningMean hi(1), lo(1);
      for (std::size_t i = 0; i < d; ++i) (bits[i] ? hi : lo).add(DenseVector{v[i]});
      put_f64(out, spec.threshold);
      put_f64(out, hi.mean()[0]);
      put_f64(out, lo.mean()[0]);
      BitWriter w;
      for (int b : bits) w.put(b != 0);
      put_bits(out, w);
      break;
    }
    case Scheme::scaled_sign:
    case Scheme::block_scaled_sign: {
      const std::size_t count = spec.scheme == Scheme::scaled_sign ? 1 : spec.blocks;
      const auto blocks = contiguous_blocks(d, count);
      put_u32(out, static_cast<std::uint32_t>(count));
      for (const auto& block : blocks) {
        double l1 = 0.0;
        for (std::size_t i : block) l1 += std::abs(v[i - 1]);
        put_f64(out, l1 / static_cast<double>(block.size()));
      }
      put_signs(out, v);
      break;
    }
  }
  msg.dense = decode_message(msg.wire);
  return msg;
}

DenseVector decode_message(const std::vector<std::uint8_t>& wire) {
  ByteReader r(wire);
  const std::uint8_t tag = r.u8();
  if (tag > static_cast<std::uint8_t>(Scheme::block_scaled_sign)) throw DecodeError("unknown scheme tag", 0);
  const auto scheme = static_cast<Scheme>(tag);
  const std::size_t d = r.u32();
  DenseVector v(d);

  switch (scheme) {
    case Scheme::identity:
      for (std::size_t i = 0; i < d; ++i) v[i] = r.f64();
      break;
    case Scheme::random_p:
    case Scheme::top_k:
    case Scheme::rand_k:
    case Scheme::r_top_k:
    case Scheme::sync_mask: {
      const std::size_t start = r.offset();
      const EncodedBlob blob = blob_from_bytes(r.take(r.remaining()));
      if (blob.dim != d) throw DecodeError("sparse payload dimension mismatch", start * 8);
      v = decode_sparse(blob).to_dense();
      break;
    }
    case Scheme::stochastic_uniform: {
      UniformLevels q;
      q.levels = r.u32();
      if (q.levels == 0) throw DecodeError("zero level count", r.offset() * 8);
      q.norm = r.f64();
      const unsigned width = bits_for_count(std::uint64_t{q.levels} + 1);
      const auto bits = read_bits(r, d * (1 + width));
      BitReader br(bits);
      q.level.resize(d);
      q.sign.resize(d);
      for (std::size_t i = 0; i < d; ++i) {
        q.sign[i] = br.get() ? 1 : -1;
        const auto level = br.get_uint(width);
        if (level > q.levels) throw DecodeError("quantization level out of range", br.position());
        q.level[i] = static_cast<std::uint32_t>(level);
      }
      v = q.to_dense();
      break;
    }
    case Scheme::ternary: {
      const double gmax = r.f64();
      const auto bits = read_bits(r, 2 * d);
      for (std::size_t i = 0; i < d; ++i) {
        const bool nonzero = bits[2 * i], negative = bits[2 * i + 1];
        if (!nonzero && negative) throw DecodeError("invalid ternary symbol", 2 * i);
        if (nonzero) v[i] = negative ? -gmax : gmax;
      }
      break;
    }
    case Scheme::sign: {
      const auto bits = read_bits(r, d);
      for (std::size_t i = 0; i < d; ++i) v[i] = bits[i] ? 1.0 : -1.0;
      break;
    }
    case Scheme::thresholded_1bit: {
      r.f64();  // threshold, informational
      const double hi = r.f64(), lo = r.f64();
      const auto bits = read_bits(r, d);
      for (std::size_t i = 0; i < d; ++i) v[i] = bits[i] ? hi : lo;
      break;
    }
    case Scheme::scaled_sign:
    case Scheme::block_scaled_sign: {
      const std::size_t count = r.u32();
      if (count == 0 || count > d) throw DecodeError("invalid block count", 40);
      std::vector<double> scales(count);
      for (double& s : scales) s = r.f64();
      const auto bits = read_bits(r, d);
      const auto blocks = contiguous_blocks(d, count);
      for (std::size_t b = 0; b < count; ++b)
        for (std::size_t i : blocks[b]) v[i - 1] = bits[i - 1] ? scales[b] : -scales[b];
      break;
    }
  }
  if (r.remaining() != 0) throw DecodeError("trailing bytes after message", r.offset() * 8);
  return v;
}

EfResult ef_compress(const DenseVector& g, const ErrorState& e, const CompressorSpec& spec,
                     RngStream& rng, std::size_t round) {
  require_same_dim(g, e.residual, "ef_compress");
  const DenseVector corrected = g + e.residual;
  EfResult out;
  out.message = compress(corrected, spec, rng, round);
  out.error.owner = e.owner;
  out.error.residual = corrected - out.message.dense;
  return out;
}

ContractionEstimate contraction_check(const CompressorSpec& spec, std::size_t d, std::size_t num_x,
                                      std::size_t draws, RngStream& rng) {
  COLEARN_REQUIRE(num_x >= 1 && draws >= 1, "contraction_check: trials must be positive");
  spec.validate(d);
  ContractionEstimate est;
  for (std::size_t n = 0; n < num_x; ++n) {
    DenseVector x(d);
    for (double& c : x) c = rng.normal();
    const double energy = x.norm2_squared();
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
      const double ratio = (x - compress(x, spec, rng).dense).norm2_squared() / energy;
      sum += ratio;
      sum_sq += ratio * ratio;
    }
    const double mean = sum / static_cast<double>(draws);
    const double var = draws > 1 ? std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(draws - 1)) : 0.0;
    if (mean > est.max_ratio) {
      est.max_ratio = mean;
      est.max_std_err = std::sqrt(var / static_cast<double>(draws));
    }
  }
  return est;
}

}  // namespace colearn::compression
