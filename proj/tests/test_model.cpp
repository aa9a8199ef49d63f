// Copyright 2026 The DMR Authors.
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

#include <gtest/gtest.h>

#include <cmath>

#include "dmr/model/checkpoint.hpp"
#include "dmr/model/gumbel.hpp"
#include "dmr/model/masker.hpp"
#include "dmr/model/reconstructor.hpp"
#include "dmr/training/adamw.hpp"
#include "dmr/training/dmr_step.hpp"
#include "grad_check.hpp"
#include "test_util.hpp"

namespace dmr {
namespace {

using testing::ToyConfig;
using testing::ToyEncoding;

// Central-difference check of every coordinate of `params` against the
// gradients accumulated by `backward`, for a scalar `loss`.
template <typename LossFn, typename BackwardFn>
void ExpectParameterGradients(const ParameterList<double>& params, LossFn loss, BackwardFn backward,
                              double tolerance = 1e-5) {
  ZeroGrads(params);
  backward();
  int checked = 0;
  for (Parameter<double>* p : params) {
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      const double a = p->grad.data()[k];
      double& v = p->value.data()[k];
      const double saved = v;
      v = saved + 1e-6;
      const double up = loss();
      v = saved - 1e-6;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / 2e-6;
      // Central differences carry roughly 1e-10 of roundoff here, which
      // dominates for gradients that are zero by symmetry (e.g. key biases).
      const double err = std::abs(a - numeric);
      EXPECT_TRUE(err < 1e-8 || err / std::max(std::abs(a), std::abs(numeric)) < tolerance)
          << p->name << "[" << k << "] analytic " << a << " numeric " << numeric;
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(ModelGradients, ReconstructorParameters) {
  const SubwordEncoding enc = ToyEncoding();
  Reconstructor<double> recon(ToyConfig(1));
  Rng rng(3);
  recon.Init(rng, 0.5);
  Matrix<double> weights(enc.size(), 8);
  for (int i = 0; i < weights.size(); ++i) weights.data()[i] = rng.Normal();
  Vector<double> gate(enc.size());
  gate << 1, 0.3, 1, 0, 0.8, 1;
  const auto loss = [&] {
    typename Reconstructor<double>::Cache cache;
    return (recon.Forward(recon.ApplyMask(enc, gate), cache).array() * weights.array()).sum();
  };
  ExpectParameterGradients(recon.Parameters(), loss, [&] {
    typename Reconstructor<double>::Cache cache;
    recon.Forward(recon.ApplyMask(enc, gate), cache);
    const Matrix<double> dx = recon.Backward(weights, cache);
    recon.ApplyMaskBackward(enc, gate, dx);
  });
}

TEST(ModelGradients, MaskerParametersThroughSoftGate) {
  const SubwordEncoding enc = ToyEncoding();
  TokenClassifier<double> masker(ToyConfig(1));
  Reconstructor<double> recon(ToyConfig(1));
  Rng rng(5);
  masker.Init(rng, 0.5);
  recon.Init(rng, 0.5);
  const auto loss = [&] {
    const MaskDecision d = StGumbelSample(MaskerForward(masker, enc), 0.7, 11);
    return GatedReconstruction(recon, enc, GateValues<double>(d, GateMode::kSoft), 0.4, false)
        .total_loss;
  };
  const ParameterList<double> params = masker.Parameters();
  ExpectParameterGradients(params, loss, [&] {
    ZeroGrads(recon.Parameters());
    DmrForwardBackward(masker, recon, enc, 0.4, 0.7, 11, GateMode::kSoft, 1.0);
  });
}

TEST(ModelGradients, StraightThroughLogitsMatchSoftPath) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const testing::GradCheckResult r = testing::CheckMaskerLogitGradients(seed);
    EXPECT_GT(r.checked, 0);
    EXPECT_EQ(r.passed, r.checked) << "seed " << seed << " max rel " << r.max_rel_error;
  }
}

TEST(Gumbel, LargeGapAlmostAlwaysKeeps) {
  const SubwordEncoding enc = ToyEncoding();
  Matrix<double> logits = Matrix<double>::Zero(enc.size(), 2);
  logits.col(0).setConstant(20.0);
  const MaskerOutput<double> out = testing::OutputFromLogits(logits, enc);
  for (double tau : {0.1, 0.5, 1.0}) {
    long keeps = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) keeps += StGumbelSample(out, tau, s).hard[1];
    EXPECT_GE(keeps / 10000.0, 0.999);
  }
}

TEST(Gumbel, MarginalsMatchLogisticGap) {
  const SubwordEncoding enc = ToyEncoding();
  for (double gap : {-2.0, 0.0, 2.0}) {
    Matrix<double> logits = Matrix<double>::Zero(enc.size(), 2);
    logits.col(0).setConstant(gap);
    const MaskerOutput<double> out = testing::OutputFromLogits(logits, enc);
    long keeps = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) keeps += StGumbelSample(out, 1.0, s).hard[2];
    EXPECT_NEAR(keeps / 10000.0, 1.0 / (1.0 + std::exp(-gap)), 0.02) << "gap " << gap;
  }
}

TEST(Gumbel, HardPathIgnoresTemperature) {
  const SubwordEncoding enc = ToyEncoding();
  Matrix<double> logits(enc.size(), 2);
  logits << 0, 0, 0.3, -0.2, -1, 1, 2, 0.5, 0, 0.1, 0, 0;
  const MaskerOutput<double> out = testing::OutputFromLogits(logits, enc);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const MaskDecision a = StGumbelSample(out, 0.1, s);
    const MaskDecision b = StGumbelSample(out, 1.0, s);
    EXPECT_EQ(a.hard, b.hard);
    if (s == 0) {
      EXPECT_NE(a.soft_keep, b.soft_keep);
    }
  }
}

TEST(Gumbel, SpecialPositionsAlwaysKept) {
  const SubwordEncoding enc = ToyEncoding();
  Matrix<double> logits = Matrix<double>::Zero(enc.size(), 2);
  logits.col(1).setConstant(50.0);
  const MaskDecision d = StGumbelSample(testing::OutputFromLogits(logits, enc), 1.0, 1);
  EXPECT_EQ(d.hard.front(), 1);
  EXPECT_EQ(d.hard.back(), 1);
  EXPECT_DOUBLE_EQ(MaskRate(d), 1.0);
  const Matrix<double> dl = GateBackward<double>(d, Vector<double>::Ones(enc.size()));
  EXPECT_EQ(dl.row(0).norm(), 0.0);
  EXPECT_EQ(dl.row(enc.size() - 1).norm(), 0.0);
}

TEST(Gumbel, RejectsNonPositiveTemperature) {
  const SubwordEncoding enc = ToyEncoding();
  const MaskerOutput<double> out =
      testing::OutputFromLogits(Matrix<double>::Zero(enc.size(), 2), enc);
  EXPECT_THROW(StGumbelSample(out, 0.0, 1), Error);
  EXPECT_THROW(StGumbelSample(out, -1.0, 1), Error);
}

TEST(ApplyMask, KeepAndMaskExtremes) {
  const SubwordEncoding enc = ToyEncoding();
  Reconstructor<double> recon(ToyConfig(1));
  Rng rng(2);
  recon.Init(rng);
  const Matrix<double>& table = recon.token_embeddings();
  const Matrix<double> kept = recon.ApplyMask(enc, Vector<double>::Ones(enc.size()));
  for (int i = 0; i < enc.size(); ++i) {
    EXPECT_EQ(kept.row(i), table.row(enc.ids[static_cast<std::size_t>(i)]));
  }
  const Matrix<double> masked = recon.ApplyMask(enc, Vector<double>::Zero(enc.size()));
  EXPECT_EQ(masked.row(0), table.row(SubwordVocab::kCls));
  for (int i = 1; i + 1 < enc.size(); ++i) EXPECT_EQ(masked.row(i), table.row(SubwordVocab::kMask));
}

TEST(ApplyMask, GateGradientIsEmbeddingDifference) {
  const SubwordEncoding enc = ToyEncoding();
  Reconstructor<double> recon(ToyConfig(1));
  Rng rng(2);
  recon.Init(rng);
  const Matrix<double> table = recon.token_embeddings();
  for (int i = 1; i + 1 < enc.size(); ++i) {
    for (int d = 0; d < table.cols(); ++d) {
      Matrix<double> dx = Matrix<double>::Zero(enc.size(), table.cols());
      dx(i, d) = 1.0;
      const Vector<double> dgate = recon.ApplyMaskBackward(enc, Vector<double>::Ones(enc.size()), dx);
      EXPECT_DOUBLE_EQ(dgate(i), table(enc.ids[static_cast<std::size_t>(i)], d) - table(SubwordVocab::kMask, d));
    }
  }
}

TEST(Reconstructor, RowsAreDistributions) {
  const SubwordEncoding enc = ToyEncoding();
  Reconstructor<double> recon(ToyConfig(2));
  Rng rng(4);
  recon.Init(rng, 0.3);
  typename Reconstructor<double>::Cache cache;
  const Matrix<double> lp = recon.Forward(recon.ApplyMask(enc, Vector<double>::Ones(enc.size())), cache);
  for (int i = 0; i < lp.rows(); ++i) EXPECT_NEAR(lp.row(i).array().exp().sum(), 1.0, 1e-5);
}

TEST(Reconstructor, OverfitsOneSentence) {
  SubwordEncoding enc = ToyEncoding();
  enc.ids = {SubwordVocab::kCls, 5, 6, 7, 6, SubwordVocab::kSep};
  Reconstructor<double> recon(ToyConfig(1));
  Rng rng(8);
  recon.Init(rng);
  AdamWOptions opts;
  opts.learning_rate = 1e-2;
  opts.weight_decay = 0.0;
  opts.total_steps = 300;
  AdamW<double> opt(recon.Parameters(), opts);
  Vector<double> gate = Vector<double>::Ones(enc.size());
  gate(2) = 0.0;
  for (int step = 0; step < 300; ++step) {
    ZeroGrads(recon.Parameters());
    GatedReconstruction(recon, enc, gate, 0.0, true);
    opt.Step();
  }
  typename Reconstructor<double>::Cache cache;
  const Matrix<double> lp = recon.Forward(recon.ApplyMask(enc, gate), cache);
  Eigen::Index best = 0;
  lp.row(2).maxCoeff(&best);
  EXPECT_EQ(best, 6);
}

TEST(Masker, SpecialKeepAndDeterminism) {
  const SubwordEncoding enc = ToyEncoding();
  TokenClassifier<double> masker(ToyConfig(2));
  Rng rng(6);
  masker.Init(rng, 0.5);
  const MaskerOutput<double> a = MaskerForward(masker, enc);
  const MaskerOutput<double> b = MaskerForward(masker, enc);
  ASSERT_EQ(a.keep_prob.size(), enc.size());
  EXPECT_EQ(a.keep_prob(0), 1.0);
  EXPECT_EQ(a.keep_prob(enc.size() - 1), 1.0);
  EXPECT_EQ(a.logits, b.logits);
  for (int i = 1; i + 1 < enc.size(); ++i) {
    EXPECT_GT(a.keep_prob(i), 0.0);
    EXPECT_LT(a.keep_prob(i), 1.0);
  }
}

TEST(Masker, LengthMismatchThrows) {
  SubwordEncoding enc = ToyEncoding();
  enc.subword_to_word.pop_back();
  TokenClassifier<double> masker(ToyConfig(1));
  EXPECT_THROW(MaskerForward(masker, enc), Error);
}

TEST(Vocab, EncodingAlignmentAndTruncation) {
  std::string text;
  for (int i = 0; i < 600; ++i) text += "oil ";
  const Passage long_passage = MakePassage("long", text);
  const Passage single = MakePassage("one", "oil");
  const std::vector<Passage> corpus{long_passage, single};
  const SubwordVocab vocab = SubwordVocab::Build(corpus);
  const SubwordEncoding enc = EncodeSubwords(long_passage, vocab, 512);
  EXPECT_TRUE(enc.truncated);
  EXPECT_EQ(enc.size(), 512);
  const SubwordEncoding s = EncodeSubwords(single, vocab, 512);
  EXPECT_FALSE(s.truncated);
  for (int w : s.subword_to_word) EXPECT_TRUE(w == 0 || w == -1);
  EXPECT_EQ(s.ids.front(), SubwordVocab::kCls);
  EXPECT_EQ(s.ids.back(), SubwordVocab::kSep);
}

TEST(Vocab, RareWordsSplitIntoPieces) {
  const std::vector<Passage> corpus{MakePassage("a", "stir the pot"), MakePassage("b", "stir the pan")};
  const SubwordVocab vocab = SubwordVocab::Build(corpus);
  EXPECT_TRUE(vocab.Find("stir").has_value());
  EXPECT_FALSE(vocab.Find("pot").has_value());
  const std::vector<int> pieces = vocab.EncodeWord("pot");
  ASSERT_EQ(pieces.size(), 3u);
  EXPECT_EQ(vocab.token(pieces[1]), "##o");
  EXPECT_EQ(vocab.EncodeWord("zzz"), std::vector<int>{SubwordVocab::kUnk});
  const SubwordEncoding enc = EncodeSubwords(MakePassage("c", "stir zzz"), vocab, 16);
  EXPECT_EQ(enc.unknown_count, 1);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  TokenClassifier<double> masker(ToyConfig(1));
  Rng rng(9);
  masker.Init(rng);
  Checkpoint c;
  c.role = "masker";
  c.config = ToyConfig(1);
  c.vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "a", "b", "c"};
  c.metadata = {{"seed", 9}};
  c.tensors = ExportTensors(masker.Parameters());
  const std::string bytes = SerializeCheckpoint(c);
  const Checkpoint back = DeserializeCheckpoint(bytes);
  EXPECT_EQ(back.role, "masker");
  EXPECT_EQ(back.vocab, c.vocab);
  EXPECT_EQ(back.metadata, c.metadata);
  ASSERT_EQ(back.tensors.size(), c.tensors.size());
  for (std::size_t i = 0; i < c.tensors.size(); ++i) EXPECT_EQ(back.tensors[i].data, c.tensors[i].data);
  TokenClassifier<double> copy(ToyConfig(1));
  ImportTensors(back, copy.Parameters());
  EXPECT_EQ(MaskerForward(copy, ToyEncoding()).logits, MaskerForward(masker, ToyEncoding()).logits);

  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DeserializeCheckpoint(bad), Error);
  EXPECT_THROW(DeserializeCheckpoint(bytes.substr(0, bytes.size() - 3)), Error);
  std::string version = bytes;
  version[8] = 9;
  EXPECT_THROW(DeserializeCheckpoint(version), Error);
}

TEST(EncoderConfigTest, Validation) {
  EncoderConfig c = ToyConfig(1);
  EXPECT_NO_THROW(c.Validate());
  c.num_heads = 3;
  EXPECT_THROW(c.Validate(), Error);
  c = ToyConfig(1);
  c.max_input_length = 7;
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_EQ(EncoderConfig::FromJson(ToyConfig(1).ToJson()).ToJson(), ToyConfig(1).ToJson());
}

}  // namespace
}  // namespace dmr
