#include "vitslim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "vitslim/autograd.hpp"
#include "vitslim/error.hpp"
#include "vitslim/json_util.hpp"
#include "vitslim/ops.hpp"

namespace vitslim {

const char* to_string(Schedule s) {
  return s == Schedule::constant ? "constant" : "warmup_cosine";
}

Schedule parse_schedule(const std::string& name) {
  if (name == "constant") return Schedule::constant;
  if (name == "warmup_cosine") return Schedule::warmup_cosine;
  throw ConfigError("unknown schedule '" + name + "' (expected constant or warmup_cosine)");
}

void TrainHyper::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw ConfigError("warmup_fraction must lie in [0, 1]");
  }
  sparsity.validate();
}

void to_json(nlohmann::json& j, const TrainHyper& h) {
  j = nlohmann::json{{"epochs", h.epochs},
                     {"batch_size", h.batch_size},
                     {"lr", h.lr},
                     {"weight_decay", h.weight_decay},
                     {"schedule", to_string(h.schedule)},
                     {"warmup_fraction", h.warmup_fraction},
                     {"augment", h.augment},
                     {"sparsity",
                      {{"attn", h.sparsity.attn},
                       {"mlp", h.sparsity.mlp},
                       {"patch", h.sparsity.patch},
                       {"patch_target", h.sparsity.patch_target == PatchPenaltyTarget::activated
                                            ? "activated"
                                            : "raw"}}},
                     {"seed", h.seed}};
}

void from_json(const nlohmann::json& j, TrainHyper& h) {
  json_util::ObjectReader r(j, "train");
  r.read("epochs", h.epochs);
  r.read("batch_size", h.batch_size);
  r.read("lr", h.lr);
  r.read("weight_decay", h.weight_decay);
  std::string schedule;
  if (r.read("schedule", schedule)) h.schedule = parse_schedule(schedule);
  r.read("warmup_fraction", h.warmup_fraction);
  if (const auto* a = r.child("augment")) h.augment = a->get<Augment>();
  if (const auto* s = r.child("sparsity")) {
    json_util::ObjectReader sr(*s, "train.sparsity");
    sr.read("attn", h.sparsity.attn);
    sr.read("mlp", h.sparsity.mlp);
    sr.read("patch", h.sparsity.patch);
    std::string target;
    if (sr.read("patch_target", target)) {
      if (target == "activated") {
        h.sparsity.patch_target = PatchPenaltyTarget::activated;
      } else if (target == "raw") {
        h.sparsity.patch_target = PatchPenaltyTarget::raw;
      } else {
        throw ConfigError("train.sparsity.patch_target must be activated or raw");
      }
    }
    sr.finish();
  }
  r.read("seed", h.seed);
  r.finish();
}

Deciles magnitude_deciles(std::span<const double> values) {
  Deciles out{};
  if (values.empty()) return out;
  std::vector<double> a(values.size());
  std::transform(values.begin(), values.end(), a.begin(), [](double v) { return std::abs(v); });
  std::sort(a.begin(), a.end());
  for (std::size_t k = 0; k <= 10; ++k) {
    const double pos = static_cast<double>(a.size() - 1) * static_cast<double>(k) / 10.0;
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, a.size() - 1);
    out[k] = a[lo] + (a[hi] - a[lo]) * (pos - static_cast<double>(lo));
  }
  return out;
}

TrainState::TrainState(Model m, std::optional<MaskSet> z, const TrainHyper& hyper)
    : model(std::move(m)), masks(std::move(z)) {
  AdamWConfig cfg;
  cfg.lr = hyper.lr;
  cfg.weight_decay = hyper.weight_decay;
  optimizer = AdamW(cfg);
  for (auto& [name, t] : model.params.named()) optimizer.add(name, t, hyper.weight_decay);
  if (masks) {
    optimizer.add("masks.attn", masks->attn, 0.0);
    optimizer.add("masks.mlp", masks->mlp, 0.0);
    optimizer.add("masks.patch_raw", masks->patch_raw, 0.0);
  }
}

std::size_t steps_per_epoch(std::size_t n, std::size_t batch_size) {
  return (n + batch_size - 1) / batch_size;
}

double scheduled_lr(const TrainHyper& hyper, std::uint64_t step, std::uint64_t total_steps) {
  if (hyper.schedule == Schedule::constant) return hyper.lr;
  const std::uint64_t warm = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(hyper.warmup_fraction * total_steps)));
  if (step < warm || total_steps <= warm) {
    return hyper.lr * static_cast<double>(step + 1) / static_cast<double>(warm);
  }
  const double progress =
      static_cast<double>(step - warm) / static_cast<double>(total_steps - warm);
  return hyper.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

namespace {

std::vector<double> magnitudes(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

void record_masks(EpochRecord& rec, const MaskSet& masks) {
  NoGradGuard guard;
  const Tensor patch = effective_patch_masks(masks);
  auto l1 = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  };
  rec.attn_l1 = l1(masks.attn.data());
  rec.mlp_l1 = l1(masks.mlp.data());
  rec.patch_l1 = l1(patch.data());
  rec.attn = magnitude_deciles(magnitudes(masks.attn));
  rec.mlp = magnitude_deciles(magnitudes(masks.mlp));
  rec.patch = magnitude_deciles(magnitudes(patch));
}

double max_abs_param(const TrainState& state) {
  double m = 0.0;
  for (const auto& slot : state.optimizer.slots()) {
    for (double v : slot.param.data()) m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace

History train(TrainState& state, const Dataset& data, const TrainHyper& hyper,
              std::optional<std::uint64_t> max_steps) {
  hyper.validate();
  data.check_compatible(state.model.config);
  const std::size_t spe = steps_per_epoch(data.n, hyper.batch_size);
  const std::uint64_t total = static_cast<std::uint64_t>(spe) * hyper.epochs;
  const std::uint64_t stop =
      max_steps ? std::min<std::uint64_t>(total, state.step + *max_steps) : total;

  History history;
  std::vector<std::size_t> order(data.n);
  while (state.step < stop) {
    const std::size_t epoch = state.step / spe;
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng perm_rng = Rng::derive(hyper.seed, {1, epoch});
    perm_rng.shuffle(std::span<std::size_t>(order));

    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t taken = 0;
    for (std::size_t b = state.step % spe; b < spe && state.step < stop; ++b) {
      const std::size_t begin = b * hyper.batch_size;
      const std::size_t end = std::min(data.n, begin + hyper.batch_size);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      Rng aug_rng = Rng::derive(hyper.seed, {2, state.step});
      const Tensor images = make_batch(data, idx, hyper.augment, &aug_rng);
      const std::vector<std::int32_t> labels = batch_labels(data, idx);

      const double lr = scheduled_lr(hyper, state.step, total);
      TapeScope tape;
      const MaskSet* masks = state.masks ? &*state.masks : nullptr;
      const Tensor ce = cross_entropy(forward(state.model, masks, images), labels);
      Tensor loss = ce;
      double penalty_value = 0.0;
      if (masks) {
        const Tensor penalty = sparsity_penalty(*masks, hyper.sparsity);
        penalty_value = penalty.item();
        loss = add(ce, penalty);
      }
      if (!std::isfinite(loss.item())) {
        std::ostringstream os;
        os << "non-finite loss at step " << state.step << " (epoch " << epoch << ", batch " << b
           << "): ce=" << ce.item() << " penalty=" << penalty_value << " lr=" << lr
           << " max|param|=" << max_abs_param(state);
        throw NumericError(os.str());
      }
      state.optimizer.zero_grad();
      backward(loss);
      state.optimizer.set_lr(lr);
      state.optimizer.step();
      ++state.step;

      history.steps.push_back({state.step, epoch, lr, ce.item(), penalty_value, loss.item()});
      rec.ce += ce.item();
      rec.penalty += penalty_value;
      rec.total += loss.item();
      ++taken;
    }
    if (state.step % spe == 0 && taken > 0) {
      rec.ce /= static_cast<double>(taken);
      rec.penalty /= static_cast<double>(taken);
      rec.total /= static_cast<double>(taken);
      if (state.masks) record_masks(rec, *state.masks);
      history.epochs.push_back(rec);
    }
  }
  return history;
}

History search(TrainState& state, const Dataset& data, const TrainHyper& hyper,
               std::optional<std::uint64_t> max_steps) {
  if (hyper.epochs == 0) throw ConfigError("search needs at least one epoch");
  if (!state.masks) throw UsageError("search requires a mask set");
  if (!state.model.arch.is_full(state.model.config)) {
    throw UsageError("search runs on the full supernet, not a sliced model");
  }
  return train(state, data, hyper, max_steps);
}

double evaluate(const Model& model, const MaskSet* masks, const Dataset& data,
                std::size_t batch_size) {
  data.check_compatible(model.config);
  NoGradGuard guard;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < data.n; begin += batch_size) {
    const std::size_t end = std::min(data.n, begin + batch_size);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Tensor logits = forward(model, masks, make_batch(data, idx, {}, nullptr));
    const std::size_t C = logits.dim(1);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const auto row = logits.data().subspan(b * C, C);
      const auto best = std::max_element(row.begin(), row.end()) - row.begin();
      if (best == data.labels[idx[b]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

TrainHyper default_supervised_hyper() {
  TrainHyper h;
  h.epochs = 100;
  h.batch_size = 64;
  h.lr = 2e-3;
  h.weight_decay = 0.05;
  h.schedule = Schedule::warmup_cosine;
  h.warmup_fraction = 0.1;
  h.augment.crop_pad = 2;
  h.sparsity = {0.0, 0.0, 0.0};
  return h;
}

}  // namespace vitslim
