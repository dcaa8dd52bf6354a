#include "trend/encoder.hpp"

#include <cmath>

#include "trend/common.hpp"

namespace trend::model {

using nn::Var;

EncoderConfig EncoderConfig::tiny() {
  return {"tiny", 2, 2, 16, 64, 128, 0};
}

EncoderConfig EncoderConfig::base() {
  return {"base", 12, 12, 768, 3072, 512, 0};
}

EncoderConfig EncoderConfig::large() {
  return {"large", 24, 16, 1024, 4096, 512, 0};
}

EncoderConfig EncoderConfig::named(const std::string& preset) {
  if (preset == "tiny") return tiny();
  if (preset == "base") return base();
  if (preset == "large") return large();
  throw InputError("unknown encoder preset: " + preset);
}

namespace {

std::string layer_prefix(int layer) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "encoder.layer%02d.", layer);
  return buf;
}

constexpr double kLnEps = 1e-12;
constexpr double kInitStd = 0.02;

}  // namespace

Encoder::Encoder(const EncoderConfig& cfg, nn::ParamStore& params, Rng& init_rng)
    : cfg_(cfg), params_(&params) {
  if (cfg_.vocab_size <= 0) throw InternalError("encoder config lacks a vocab size");
  if (cfg_.dim % cfg_.heads != 0)
    throw InternalError("encoder dim must divide evenly into heads");

  auto weight = [&](const std::string& name, int r, int c) {
    if (nn::Param* p = params_->find(name)) {
      if (p->value.rows != r || p->value.cols != c)
        throw CheckpointError("parameter " + name + " has the wrong shape");
      return;
    }
    nn::Param& p = params_->create(name, r, c);
    fill_normal(p.value, init_rng, kInitStd);
  };
  auto zeros = [&](const std::string& name, int r, int c) {
    if (nn::Param* p = params_->find(name)) {
      if (p->value.rows != r || p->value.cols != c)
        throw CheckpointError("parameter " + name + " has the wrong shape");
      return;
    }
    params_->create(name, r, c);
  };
  auto ones = [&](const std::string& name, int r, int c) {
    if (params_->find(name)) {
      zeros(name, r, c);  // shape check only
      return;
    }
    params_->create(name, r, c).value.fill(1.0);
  };

  weight("encoder.embed.token", cfg_.vocab_size, cfg_.dim);
  weight("encoder.embed.position", cfg_.max_len, cfg_.dim);
  weight("encoder.embed.type", 2, cfg_.dim);
  ones("encoder.embed.ln.gain", 1, cfg_.dim);
  zeros("encoder.embed.ln.bias", 1, cfg_.dim);
  for (int l = 0; l < cfg_.layers; ++l) {
    std::string p = layer_prefix(l);
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"})
      weight(p + w, cfg_.dim, cfg_.dim);
    for (const char* b : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"})
      zeros(p + b, 1, cfg_.dim);
    ones(p + "attn.ln.gain", 1, cfg_.dim);
    zeros(p + "attn.ln.bias", 1, cfg_.dim);
    weight(p + "ffn.w1", cfg_.dim, cfg_.ffn_dim);
    zeros(p + "ffn.b1", 1, cfg_.ffn_dim);
    weight(p + "ffn.w2", cfg_.ffn_dim, cfg_.dim);
    zeros(p + "ffn.b2", 1, cfg_.dim);
    ones(p + "ffn.ln.gain", 1, cfg_.dim);
    zeros(p + "ffn.ln.bias", 1, cfg_.dim);
  }
}

Encoded Encoder::encode(nn::Tape& tape, const corpus::TokenizedInstance& inst) const {
  int n = static_cast<int>(inst.token_ids.size());
  if (n == 0) throw InternalError("cannot encode an empty instance");
  if (n > cfg_.max_len)
    throw InputError("instance " + inst.example_id + " exceeds the encoder length limit");
  for (int id : inst.token_ids)
    if (id < 0 || id >= cfg_.vocab_size)
      throw InternalError("token id outside the embedding table");

  nn::ParamStore& ps = *params_;
  auto leaf = [&](const std::string& name) { return tape.leaf(ps.at(name)); };
  auto affine = [&](Var x, const std::string& w, const std::string& b) {
    return nn::add_rowvec(nn::matmul(x, leaf(w)), leaf(b));
  };

  std::vector<int> types(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) types[static_cast<size_t>(i)] = i <= inst.sep_pos ? 0 : 1;
  std::vector<int> positions(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) positions[static_cast<size_t>(i)] = i;

  Var x = nn::rows(leaf("encoder.embed.token"), inst.token_ids);
  x = nn::add(x, nn::rows(leaf("encoder.embed.position"), positions));
  x = nn::add(x, nn::rows(leaf("encoder.embed.type"), types));
  x = nn::layer_norm(x, leaf("encoder.embed.ln.gain"), leaf("encoder.embed.ln.bias"), kLnEps);

  int head_dim = cfg_.dim / cfg_.heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (int l = 0; l < cfg_.layers; ++l) {
    std::string p = layer_prefix(l);
    Var q = affine(x, p + "attn.wq", p + "attn.bq");
    Var k = affine(x, p + "attn.wk", p + "attn.bk");
    Var v = affine(x, p + "attn.wv", p + "attn.bv");
    Var ctx;
    for (int h = 0; h < cfg_.heads; ++h) {
      Var qh = nn::slice_cols(q, h * head_dim, head_dim);
      Var kh = nn::slice_cols(k, h * head_dim, head_dim);
      Var vh = nn::slice_cols(v, h * head_dim, head_dim);
      Var scores = nn::scale(nn::matmul_nt(qh, kh), inv_sqrt);
      Var ctx_h = nn::matmul(nn::softmax_rows(scores), vh);
      ctx = h == 0 ? ctx_h : nn::concat_cols(ctx, ctx_h);
    }
    Var attn = affine(ctx, p + "attn.wo", p + "attn.bo");
    x = nn::layer_norm(nn::add(x, attn), leaf(p + "attn.ln.gain"), leaf(p + "attn.ln.bias"),
                       kLnEps);
    Var f = nn::gelu(affine(x, p + "ffn.w1", p + "ffn.b1"));
    f = affine(f, p + "ffn.w2", p + "ffn.b2");
    x = nn::layer_norm(nn::add(x, f), leaf(p + "ffn.ln.gain"), leaf(p + "ffn.ln.bias"), kLnEps);
  }

  Encoded out;
  out.hidden = x;
  out.cls1 = nn::row(x, inst.cls1_pos);
  out.cls2 = nn::row(x, inst.cls2_pos);
  return out;
}

}  // namespace trend::model
