// Copyright 2026 The fidcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fidcal/calib/backbone.hpp"
#include "fidcal/calib/calibration.hpp"
#include "fidcal/io/container.hpp"
#include "fidcal/io/hash.hpp"
#include "fidcal/nn/gradcheck.hpp"
#include "fidcal/nn/losses.hpp"
#include "fidcal/rng.hpp"
#include "test_util.hpp"

using namespace fidcal;
using namespace fidcal::calib;

namespace {

template <typename T>
void randomize(TensorT<T>& t, Rng& rng, double scale = 1.0) {
  for (auto& v : t.values()) v = static_cast<T>(rng.normal() * scale);
}

template <typename T>
void fill_uniform(TensorT<T>& t, Rng& rng, double lo, double hi) {
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
}

template <typename T>
bool exactly_equal(const TensorT<T>& a, const TensorT<T>& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

template <typename T>
bool any_nonzero(const TensorT<T>& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] != T(0)) return true;
  return false;
}

BackboneConfig small_config() {
  BackboneConfig cfg;
  cfg.in_channels = 3;
  cfg.num_classes = 5;
  cfg.conv_widths = {8, 8, 16};
  cfg.pool_after = {1};
  return cfg;
}

/// Small trained-looking backbone in inference mode, with running batch-norm
/// statistics moved off their defaults so the affine actually acts.
template <typename T>
BackboneT<T> make_backbone(std::uint64_t seed) {
  BackboneT<T> net(small_config());
  Rng rng(seed);
  net.init(rng);
  for (auto& bn : net.bns()) {
    fill_uniform(bn.running_mean(), rng, -0.2, 0.2);
    fill_uniform(bn.running_var(), rng, 0.5, 1.5);
    randomize(bn.gamma().value, rng, 0.2);
    for (auto& v : bn.gamma().value.values()) v += T(1);
    randomize(bn.beta().value, rng, 0.1);
  }
  net.set_train_mode(false);
  return net;
}

template <typename T>
TensorT<T> make_input(Rng& rng, int n, int c, int h, int w) {
  TensorT<T> x({n, c, h, w});
  fill_uniform(x, rng, -1.0, 1.0);
  return x;
}

template <typename T>
TensorT<T> make_fid(Rng& rng, int n, int h, int w) {
  TensorT<T> f({n, 1, h, w});
  fill_uniform(f, rng, -0.5, 2.0);
  return f;
}

/// Moves every calibration parameter off its init point so no path is
/// degenerate (used before gradient checks and recovery tests).
template <typename T>
void randomize_calibration(CalibratedModelT<T>& model, std::uint64_t seed, double scale = 0.3) {
  Rng rng(seed);
  for (auto* p : model.params()) randomize(p->value, rng, scale);
  for (auto& site : model.sites())
    site.s().value.fill(T(0.3));
  if (model.config().ensemble) fill_uniform(model.ensemble_gate().value, rng, -0.6, 0.6);
}

}  // namespace

TEST_CASE("backbone configuration rejects invalid setups") {
  BackboneConfig cfg = small_config();
  cfg.kernel = 4;
  CHECK_THROWS_AS(cfg.validate(), Error);

  cfg = small_config();
  cfg.conv_widths.clear();
  CHECK_THROWS_AS(cfg.validate(), Error);

  cfg = small_config();
  cfg.pool_after = {3};
  CHECK_THROWS_AS(cfg.validate(), Error);

  cfg = small_config();
  cfg.pool_after = {1, 1};
  CHECK_THROWS_AS(cfg.validate(), Error);

  cfg = small_config();
  cfg.num_classes = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("backbone enumerates insertion sites in forward order") {
  Backbone net{BackboneConfig{}};
  Rng rng(11);
  net.init(rng);
  net.set_train_mode(false);

  CHECK(net.num_sites() == 4);
  CHECK(net.feature_dim() == 128);

  const BackboneSplit split = split_backbone(net);
  REQUIRE(split.num_sites() == 4);
  CHECK(split.feature_dim == 128);
  CHECK(split.insertion_points[0].name == "input");
  CHECK(split.insertion_points[0].channels == 3);
  CHECK(split.insertion_points[1].name == "pre_pool1");
  CHECK(split.insertion_points[1].channels == 32);
  CHECK(split.insertion_points[2].name == "pre_pool2");
  CHECK(split.insertion_points[2].channels == 64);
  CHECK(split.insertion_points[3].name == "pre_gap");
  CHECK(split.insertion_points[3].channels == 128);

  Rng drng(12);
  const Tensor x = make_input<float>(drng, 2, 3, 32, 32);

  std::vector<int> visited;
  std::vector<std::vector<int>> shapes;
  auto spy = [&](int site, Tensor t) {
    visited.push_back(site);
    shapes.push_back(t.shape());
    return t;
  };
  const Tensor feat = net.features(x, spy);
  CHECK(feat.shape() == std::vector<int>{2, 128});
  CHECK(visited == std::vector<int>{0, 1, 2, 3});
  CHECK(shapes[0] == std::vector<int>{2, 3, 32, 32});
  CHECK(shapes[1] == std::vector<int>{2, 32, 32, 32});
  CHECK(shapes[2] == std::vector<int>{2, 64, 16, 16});
  CHECK(shapes[3] == std::vector<int>{2, 128, 8, 8});

  const Tensor logits = net.forward(x);
  CHECK(logits.shape() == std::vector<int>{2, 12});
  CHECK(exactly_equal(logits, net.head().forward(net.features(x))));

  visited.clear();
  Tensor gfeat({2, 128});
  gfeat.fill(1.0f);
  (void)net.forward(x);
  (void)net.features_backward(gfeat, spy);
  CHECK(visited == std::vector<int>{3, 2, 1, 0});
}

TEST_CASE("backbone checkpoints round-trip and hash to the file contents") {
  testutil::TempDir tmp;
  Backbone net = make_backbone<float>(21);
  const std::string path = tmp.file("backbone.fidc");
  save_backbone(net, path);

  CHECK(backbone_content_hash(net) == io::sha256_file(path));

  Backbone loaded = load_backbone(path);
  loaded.set_train_mode(false);
  for (std::size_t i = 0; i < net.convs().size(); ++i) {
    CHECK(exactly_equal(net.convs()[i].weight().value, loaded.convs()[i].weight().value));
    CHECK(exactly_equal(net.convs()[i].bias().value, loaded.convs()[i].bias().value));
  }
  for (std::size_t i = 0; i < net.bns().size(); ++i) {
    CHECK(exactly_equal(net.bns()[i].gamma().value, loaded.bns()[i].gamma().value));
    CHECK(exactly_equal(net.bns()[i].running_mean(), loaded.bns()[i].running_mean()));
    CHECK(exactly_equal(net.bns()[i].running_var(), loaded.bns()[i].running_var()));
  }
  CHECK(exactly_equal(net.head().weight().value, loaded.head().weight().value));

  Rng rng(22);
  const Tensor x = make_input<float>(rng, 2, 3, 16, 16);
  CHECK(exactly_equal(net.forward(x), loaded.forward(x)));

  net.convs()[0].weight().value[0] += 0.25f;
  CHECK(backbone_content_hash(net) != io::sha256_file(path));

  const io::Container c = io::Container::read(path);
  CHECK(c.kind() == "backbone");
}

TEST_CASE("calibrated model is the identity at initialization") {
  const Backbone net = make_backbone<float>(31);
  Backbone ref = net;
  Rng rng(32);
  const Tensor x = make_input<float>(rng, 3, 3, 16, 16);
  const Tensor fid = make_fid<float>(rng, 3, 16, 16);
  const Tensor want = ref.forward(x);

  CalibConfig cfg;
  cfg.spatial_hidden = 4;
  cfg.channel_hidden = 6;

  auto check_identity = [&](const CalibConfig& c) {
    CalibratedModel model(net, c);
    Rng init_rng(33);
    model.init(init_rng);
    const Tensor got = model.forward(x, fid);
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
  };

  SUBCASE("full configuration") { check_identity(cfg); }
  SUBCASE("without spatial gating") {
    cfg.spatial_mult = false;
    check_identity(cfg);
  }
  SUBCASE("without spatial addition") {
    cfg.spatial_add = false;
    check_identity(cfg);
  }
  SUBCASE("without channel gating") {
    cfg.channel_mult = false;
    check_identity(cfg);
  }
  SUBCASE("without the concat stage") {
    cfg.channel_concat = false;
    check_identity(cfg);
  }
  SUBCASE("without the ensemble") {
    cfg.ensemble = false;
    check_identity(cfg);
  }
  SUBCASE("without residual skips, zero-initialized finals take over") {
    cfg.residual = false;
    cfg.channel_concat = false;
    check_identity(cfg);
  }
}

TEST_CASE("without residual skips the concat stage collapses to the head bias at init") {
  const Backbone net = make_backbone<float>(41);
  Backbone ref = net;
  Rng rng(42);
  const Tensor x = make_input<float>(rng, 2, 3, 16, 16);
  const Tensor fid = make_fid<float>(rng, 2, 16, 16);

  CalibConfig cfg;
  cfg.spatial_hidden = 4;
  cfg.channel_hidden = 6;
  cfg.residual = false;
  cfg.ensemble = false;
  CalibratedModel model(net, cfg);
  Rng init_rng(43);
  model.init(init_rng);

  const Tensor got = model.forward(x, fid);
  const Tensor plain = ref.forward(x);
  CHECK_FALSE(exactly_equal(got, plain));
  for (int n = 0; n < got.dim(0); ++n)
    for (int k = 0; k < got.dim(1); ++k)
      CHECK(got[static_cast<std::size_t>(n) * got.dim(1) + k] ==
            model.backbone().head().bias().value[k]);
}

TEST_CASE("conv stack gradients verify") {
  ConvStack3<double> stack(5, 3);
  Rng rng(51);
  stack.init(rng, false);

  nn::Param<double> input;
  input.init_shape("x", {2, 1, 6, 5});
  randomize(input.value, rng, 0.7);
  TensorT<double> readout({2, 1, 6, 5});
  randomize(readout, rng);

  auto fwd = [&]() {
    const TensorT<double> y = stack.forward(input.value);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * readout[i];
    return s;
  };
  auto bwd = [&]() {
    nn::ParamRefs<double> ps;
    stack.collect(ps);
    nn::zero_grads(ps);
    input.zero_grad();
    (void)stack.forward(input.value);
    input.grad = stack.backward(readout);
  };
  nn::ParamRefs<double> ps;
  stack.collect(ps);
  ps.push_back(&input);
  const nn::GradCheckResult res = nn::gradcheck<double>(ps, fwd, bwd, 1e-4);
  INFO(res.worst_param);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("fc stack gradients verify") {
  FcStack2<double> stack(7, 5, 6);
  Rng rng(61);
  stack.init(rng, false);

  nn::Param<double> input;
  input.init_shape("x", {3, 7});
  randomize(input.value, rng, 0.8);
  TensorT<double> readout({3, 6});
  randomize(readout, rng);

  auto fwd = [&]() {
    const TensorT<double> y = stack.forward(input.value);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * readout[i];
    return s;
  };
  auto bwd = [&]() {
    nn::ParamRefs<double> ps;
    stack.collect(ps);
    nn::zero_grads(ps);
    input.zero_grad();
    (void)stack.forward(input.value);
    input.grad = stack.backward(readout);
  };
  nn::ParamRefs<double> ps;
  stack.collect(ps);
  ps.push_back(&input);
  const nn::GradCheckResult res = nn::gradcheck<double>(ps, fwd, bwd, 1e-4);
  INFO(res.worst_param);
  CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("spatial block gradients verify under every flag combination") {
  struct Combo {
    bool mult, add, residual;
  };
  const Combo combos[] = {{true, true, true},
                          {true, false, true},
                          {false, true, true},
                          {true, true, false},
                          {false, true, false}};
  for (const Combo& combo : combos) {
    CAPTURE(combo.mult);
    CAPTURE(combo.add);
    CAPTURE(combo.residual);

    SpatialBlock<double> block(3, 3, combo.mult, combo.add, combo.residual,
                               imaging::Resample::bilinear);
    Rng rng(71);
    block.init(rng);
    // Zero-initialized biases leave dead receptive fields sitting exactly on
    // relu kinks, where one-sided analytic gradients and central differences
    // legitimately disagree; random biases keep the check off that set.
    nn::ParamRefs<double> all;
    block.gate_stack().collect(all);
    block.add_stack().collect(all);
    for (auto* p : all) randomize(p->value, rng, 0.4);
    if (combo.residual) block.s().value.fill(0.37);

    nn::Param<double> x, fid;
    x.init_shape("x", {2, 3, 6, 6});
    fid.init_shape("fid", {2, 1, 4, 4});
    randomize(x.value, rng, 0.6);
    fill_uniform(fid.value, rng, -0.4, 1.6);
    TensorT<double> readout({2, 3, 6, 6});
    randomize(readout, rng);

    auto fwd = [&]() {
      const TensorT<double> y = block.forward(x.value, fid.value);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * readout[i];
      return s;
    };
    auto bwd = [&]() {
      nn::ParamRefs<double> ps;
      block.collect(ps);
      nn::zero_grads(ps);
      x.zero_grad();
      fid.zero_grad();
      (void)block.forward(x.value, fid.value);
      TensorT<double> gfid(fid.value.shape());
      gfid.fill(0.0);
      x.grad = block.backward(readout, &gfid);
      fid.grad = gfid;
    };
    nn::ParamRefs<double> ps;
    block.collect(ps);
    ps.push_back(&x);
    ps.push_back(&fid);
    const nn::GradCheckResult res = nn::gradcheck<double>(ps, fwd, bwd, 1e-4);
    INFO(res.worst_param);
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("inert spatial blocks pass features and gradients through untouched") {
  SpatialBlock<float> block(3, 3, false, false, true, imaging::Resample::bilinear);
  Rng rng(81);
  block.init(rng);
  CHECK_FALSE(block.active());

  Tensor x = make_input<float>(rng, 2, 4, 5, 5);
  Tensor fid = make_fid<float>(rng, 2, 5, 5);
  CHECK(exactly_equal(block.forward(x, fid), x));

  Tensor gy = make_input<float>(rng, 2, 4, 5, 5);
  Tensor gfid({2, 1, 5, 5});
  gfid.fill(0.0f);
  CHECK(exactly_equal(block.backward(gy, &gfid), gy));
  CHECK_FALSE(any_nonzero(gfid));

  nn::ParamRefs<float> ps;
  block.collect(ps);
  CHECK(ps.empty());
}

TEST_CASE("channel feature gradients verify and constants are preserved") {
  for (const imaging::Resample mode :
       {imaging::Resample::bilinear, imaging::Resample::bicubic, imaging::Resample::nearest}) {
    CAPTURE(imaging::to_string(mode));
    ChannelFeature<float> feat(8, mode);
    Tensor fid({2, 1, 5, 7});
    fid.fill(0.3f);
    const Tensor out = feat.forward(fid);
    REQUIRE(out.shape() == std::vector<int>{2, 8});
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out[i] == doctest::Approx(0.3).epsilon(1e-5));
  }

  CHECK_THROWS_AS(ChannelFeature<float>(7, imaging::Resample::bilinear), Error);

  ChannelFeature<double> feat(8, imaging::Resample::bilinear);
  Rng rng(91);
  nn::Param<double> fid;
  fid.init_shape("fid", {2, 1, 6, 4});
  fill_uniform(fid.value, rng, -0.3, 1.7);
  TensorT<double> readout({2, 8});
  randomize(readout, rng);

  auto fwd = [&]() {
    const TensorT<double> y = feat.forward(fid.value);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * readout[i];
    return s;
  };
  auto bwd = [&]() {
    fid.zero_grad();
    (void)feat.forward(fid.value);
    fid.grad = feat.backward(readout);
  };
  const nn::GradCheckResult res = nn::gradcheck<double>({&fid}, fwd, bwd, 1e-4);
  INFO(res.worst_param);
  CHECK(res.max_rel_err < 1e-7);
}

TEST_CASE("full calibrated model gradients verify end to end") {
  BackboneConfig bcfg;
  bcfg.in_channels = 3;
  bcfg.num_classes = 4;
  bcfg.conv_widths = {6, 8};
  bcfg.pool_after = {0};
  BackboneT<double> net(bcfg);
  Rng rng(101);
  net.init(rng);
  for (auto& conv : net.convs()) randomize(conv.bias().value, rng, 0.1);
  for (auto& bn : net.bns()) {
    fill_uniform(bn.running_mean(), rng, -0.2, 0.2);
    fill_uniform(bn.running_var(), rng, 0.5, 1.5);
  }
  net.set_train_mode(false);

  CalibConfig cfg;
  cfg.spatial_hidden = 3;
  cfg.channel_hidden = 5;
  CalibratedModelT<double> model(net, cfg);
  Rng init_rng(102);
  model.init(init_rng);
  randomize_calibration(model, 103, 0.3);

  nn::Param<double> fid;
  fid.init_shape("fid", {2, 1, 8, 8});
  Rng drng(104);
  fill_uniform(fid.value, drng, -0.4, 1.8);
  const TensorT<double> x = make_input<double>(drng, 2, 3, 8, 8);
  TensorT<double> readout({2, 4});
  randomize(readout, drng);

  auto fwd = [&]() {
    const TensorT<double> y = model.forward(x, fid.value);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * readout[i];
    return s;
  };
  auto bwd = [&]() {
    model.zero_grad();
    fid.zero_grad();
    (void)model.forward(x, fid.value);
    fid.grad = model.backward(readout);
  };
  nn::ParamRefs<double> ps = model.params();
  ps.push_back(&fid);
  const nn::GradCheckResult res = nn::gradcheck<double>(ps, fwd, bwd, 1e-4, 12);
  INFO(res.worst_param);
  // Finite differences can straddle relu and max-pool kinks inside the
  // frozen backbone, so the whole-model bound is the coarse production
  // contract; the per-block checks above pin tight tolerances.
  CHECK(res.max_rel_err < 1e-2);
}

TEST_CASE("initial gradients flow to the residual scales but not past them") {
  const Backbone net = make_backbone<float>(111);
  CalibConfig cfg;
  cfg.spatial_hidden = 4;
  cfg.channel_hidden = 6;
  CalibratedModel model(net, cfg);
  Rng rng(112);
  model.init(rng);

  Rng drng(113);
  const Tensor x = make_input<float>(drng, 2, 3, 16, 16);
  const Tensor fid = make_fid<float>(drng, 2, 16, 16);
  Tensor glogits({2, 5});
  randomize(glogits, drng);

  model.zero_grad();
  (void)model.forward(x, fid);
  (void)model.backward(glogits);

  for (const auto& site : model.sites()) {
    CHECK(site.s().grad[0] != 0.0f);
    CHECK_FALSE(any_nonzero(site.gate_stack().conv(0).weight().grad));
    CHECK_FALSE(any_nonzero(site.add_stack().conv(0).weight().grad));
  }
  CHECK(any_nonzero(model.mult_stack().fc2().weight().grad));
  CHECK(any_nonzero(model.concat_stack().fc2().weight().grad));
  CHECK_FALSE(any_nonzero(model.ensemble_gate().grad));
}

TEST_CASE("forcing the ensemble to the original path reproduces the backbone") {
  const Backbone net = make_backbone<float>(121);
  Backbone ref = net;
  CalibConfig cfg;
  cfg.spatial_hidden = 4;
  cfg.channel_hidden = 6;
  CalibratedModel model(net, cfg);
  Rng rng(122);
  model.init(rng);
  randomize_calibration(model, 123, 0.5);

  Rng drng(124);
  const Tensor x = make_input<float>(drng, 3, 3, 16, 16);
  const Tensor fid = make_fid<float>(drng, 3, 16, 16);
  const Tensor plain = ref.forward(x);

  const Tensor tuned = model.forward(x, fid);
  CHECK_FALSE(exactly_equal(tuned, plain));

  model.force_original_path();
  const Tensor recovered = model.forward(x, fid);
  REQUIRE(recovered.same_shape(plain));
  for (std::size_t i = 0; i < recovered.size(); ++i) CHECK(recovered[i] == plain[i]);
  for (int n = 0; n < plain.dim(0); ++n)
    CHECK(nn::argmax_row(recovered, n) == nn::argmax_row(plain, n));
}

TEST_CASE("enabled modules determine the trainable parameter set") {
  const Backbone net = make_backbone<float>(131);
  CalibConfig cfg;
  cfg.spatial_hidden = 4;
  cfg.channel_hidden = 6;

  auto count = [&](const CalibConfig& c) {
    CalibratedModel model(net, c);
    return model.params().size();
  };

  // Per site: two 3-layer conv stacks (weight + bias each) plus the scale.
  CHECK(count(cfg) == 3 * (6 + 6 + 1) + 4 + 4 + 1);

  CalibConfig no_mult = cfg;
  no_mult.spatial_mult = false;
  CHECK(count(no_mult) == 3 * (6 + 1) + 4 + 4 + 1);

  CalibConfig no_spatial = cfg;
  no_spatial.spatial_mult = false;
  no_spatial.spatial_add = false;
  CHECK(count(no_spatial) == 4 + 4 + 1);

  CalibConfig no_channel_mult = cfg;
  no_channel_mult.channel_mult = false;
  CHECK(count(no_channel_mult) == 3 * 13 + 4 + 1);

  CalibConfig no_ensemble = cfg;
  no_ensemble.ensemble = false;
  CHECK(count(no_ensemble) == 3 * 13 + 4 + 4);

  CalibConfig no_residual = cfg;
  no_residual.residual = false;
  CHECK(count(no_residual) == 3 * 12 + 4 + 4 + 1);
}

TEST_CASE("channel stages require an even feature width") {
  BackboneConfig bcfg = small_config();
  bcfg.conv_widths = {6, 7};
  bcfg.pool_after = {0};
  const Backbone net(bcfg);

  CalibConfig cfg;
  cfg.spatial_hidden = 4;
  CHECK_THROWS_AS(CalibratedModel(net, cfg), Error);

  cfg.channel_mult = false;
  cfg.channel_concat = false;
  CHECK_NOTHROW(CalibratedModel(net, cfg));
}

TEST_CASE("calibration checkpoints round-trip and bind to their backbone") {
  testutil::TempDir tmp;
  const Backbone net = make_backbone<float>(141);
  CalibConfig cfg;
  cfg.spatial_hidden = 4;
  cfg.channel_hidden = 6;
  cfg.resample = imaging::Resample::bicubic;
  CalibratedModel model(net, cfg);
  Rng rng(142);
  model.init(rng);
  randomize_calibration(model, 143, 0.4);

  const std::string path = tmp.file("calib.fidc");
  save_calibration(model, path);

  CalibratedModel loaded = load_calibration(path, net);
  CHECK(loaded.config().resample == imaging::Resample::bicubic);

  nn::ParamRefs<float> got = loaded.params();
  nn::ParamRefs<float> want = model.params();
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(exactly_equal(got[i]->value, want[i]->value));

  Rng drng(144);
  const Tensor x = make_input<float>(drng, 2, 3, 16, 16);
  const Tensor fid = make_fid<float>(drng, 2, 16, 16);
  CHECK(exactly_equal(loaded.forward(x, fid), model.forward(x, fid)));

  const Backbone other = make_backbone<float>(999);
  CHECK_THROWS_AS(load_calibration(path, other), Error);

  const std::string bpath = tmp.file("net.fidc");
  save_backbone(net, bpath);
  CHECK_THROWS_AS(load_calibration(bpath, net), Error);
}
