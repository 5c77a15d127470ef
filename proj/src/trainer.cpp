#include "grouprec/trainer.hpp"

#include <chrono>
#include <cmath>

namespace grouprec {

void TrainConfig::validate() const {
  if (dim < 1) throw UserError("config: model.dim must be >= 1");
  if (epochs < 1) throw UserError("config: train.epochs must be >= 1");
  if (gid_epoch < 0 || gid_epoch >= epochs) {
    throw UserError("config: train.gid_epoch must lie in [0, epochs)");
  }
  if (!(lr > 0.0)) throw UserError("config: opt.lr must be positive");
  if (negatives_per_positive < 1) throw UserError("config: train.negatives must be >= 1");
  if (batch_size < 1) throw UserError("config: train.batch_size must be >= 1");
  if (reidentify_every < 0) throw UserError("config: train.reidentify_every must be >= 0");
  quantiles.validate();
}

Real combine_losses(const LossWeights& w, Real l_par, Real l_pgr, Real l_u2i) {
  if (!std::isfinite(l_par) || !std::isfinite(l_pgr) || !std::isfinite(l_u2i)) {
    throw std::runtime_error("combine_losses: non-finite loss component");
  }
  return w.a * l_par + w.b * l_pgr + l_u2i;
}

BprBatch sample_negatives(const InteractionMatrix& train, int count_per_positive, Rng& rng,
                          std::vector<std::string>* warnings) {
  BprBatch batch;
  batch.reserve(train.pairs.size() * static_cast<std::size_t>(count_per_positive));
  const int m = train.n_cols;
  int skipped_users = 0;
  int last_skipped = -1;
  for (const auto& [user, pos] : train.pairs) {
    const auto& seen = train.row_index[static_cast<std::size_t>(user)];
    if (static_cast<int>(seen.size()) >= m) {
      if (user != last_skipped) {
        ++skipped_users;
        last_skipped = user;
      }
      continue;
    }
    for (int c = 0; c < count_per_positive; ++c) {
      int neg;
      do {
        neg = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
      } while (train.contains(user, neg));
      batch.push_back({user, pos, neg});
    }
  }
  if (skipped_users > 0 && warnings != nullptr) {
    warnings->push_back(std::to_string(skipped_users) +
                        " user(s) interacted with every item; no negatives sampled");
  }
  return batch;
}

TrainedModel init_training(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.n_users < 1 || ds.n_items < 1) throw UserError("dataset has no users or items");
  TrainedModel model;
  model.rng = Rng(cfg.seed);
  const std::uint64_t emb_seed = model.rng.engine()();
  model.emb = init_embeddings(ds.n_users, ds.n_items, cfg.dim, emb_seed);
  model.opt_users = make_adam(ds.n_users, cfg.dim, cfg.lr);
  model.opt_items = make_adam(ds.n_items, cfg.dim, cfg.lr);
  model.next_epoch = 0;
  return model;
}

namespace {

void identify_and_install(TrainedModel& model, const TrainConfig& cfg) {
  IdentifyTrace trace;
  model.groups = identify_groups<Real>(model.emb.users, cfg.quantiles, model.rng,
                                       cfg.explore_budget, &trace);
  model.has_groups = true;
  model.opt_centers = make_adam(model.groups.k_prime, cfg.dim, cfg.lr);
}

}  // namespace

EpochReport train_epoch(TrainedModel& model, const Dataset& ds, const TrainConfig& cfg,
                        int epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  EpochReport rep;
  rep.epoch = epoch;

  const bool identify_now =
      epoch == cfg.gid_epoch ||
      (cfg.reidentify_every > 0 && epoch > cfg.gid_epoch &&
       (epoch - cfg.gid_epoch) % cfg.reidentify_every == 0);
  if (epoch >= cfg.gid_epoch && identify_now) {
    identify_and_install(model, cfg);
  }

  if (model.has_groups) {
    // Pseudo labels always reflect the parameters entering the epoch.
    model.labels = pseudo_assignment<Real>(model.emb.users, model.groups.centers);
    model.pseudo_q = pseudo_group_interactions<Real>(model.labels.assignment, ds.train);
    if (cfg.binarize_q_prime) binarize_counts(model.pseudo_q);

    const MatX* assigned = cfg.pull_assigned_only ? &model.labels.assignment : nullptr;
    const auto par = par_loss_and_grad<Real>(model.emb.users, model.groups.centers, assigned);
    const auto pgr = pgr_loss_and_grad<Real>(model.groups.centers, model.emb.items, model.pseudo_q);
    rep.l_par = par.loss;
    rep.l_pgr = pgr.loss;

    // One full-matrix step on the weighted pre-text objective. Zero-weight
    // components leave their parameters (and moments) untouched so a=b=0
    // matches plain BPR training exactly.
    const Real a = cfg.weights.a;
    const Real b = cfg.weights.b;
    if (a > 0.0 && b > 0.0) {
      adam_step_dense(model.groups.centers, model.opt_centers,
                      a * par.grad_centers + b * pgr.grad_centers);
    } else if (a > 0.0) {
      adam_step_dense(model.groups.centers, model.opt_centers, (a * par.grad_centers).eval());
    } else if (b > 0.0) {
      adam_step_dense(model.groups.centers, model.opt_centers, (b * pgr.grad_centers).eval());
    }
    if (a > 0.0) {
      adam_step_dense(model.emb.users, model.opt_users, (a * par.grad_users).eval());
    }
    if (b > 0.0) {
      adam_step_dense(model.emb.items, model.opt_items, (b * pgr.grad_items).eval());
    }
  }

  BprBatch epoch_batch = sample_negatives(ds.train, cfg.negatives_per_positive, model.rng);
  std::shuffle(epoch_batch.begin(), epoch_batch.end(), model.rng.engine());
  Real loss_sum = 0.0;
  std::size_t user_terms = 0;
  for (std::size_t start = 0; start < epoch_batch.size();
       start += static_cast<std::size_t>(cfg.batch_size)) {
    const std::size_t len =
        std::min(static_cast<std::size_t>(cfg.batch_size), epoch_batch.size() - start);
    BprBatch chunk(epoch_batch.begin() + static_cast<std::ptrdiff_t>(start),
                   epoch_batch.begin() + static_cast<std::ptrdiff_t>(start + len));
    SparseRowGrads gu(cfg.dim);
    SparseRowGrads gi(cfg.dim);
    loss_sum += bpr_loss_and_grad(model.emb, chunk, &gu, &gi);
    user_terms += bpr_user_count(chunk);
    adam_step_rows(model.emb.users, model.opt_users, gu);
    adam_step_rows(model.emb.items, model.opt_items, gi);
  }
  rep.l_u2i = user_terms > 0 ? loss_sum / static_cast<Real>(user_terms) : 0.0;

  rep.l_total = combine_losses(cfg.weights, rep.l_par, rep.l_pgr, rep.l_u2i);
  rep.k_prime = model.has_groups ? model.groups.k_prime : 0;
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

void run_from(TrainedModel& model, const TrainConfig& cfg, const Dataset& ds,
              const EpochCallback& on_epoch) {
  cfg.validate();
  for (int epoch = model.next_epoch; epoch < cfg.epochs; ++epoch) {
    EpochReport rep = train_epoch(model, ds, cfg, epoch);
    model.history.push_back(rep);
    model.next_epoch = epoch + 1;
    if (on_epoch) on_epoch(rep);
  }
}

TrainedModel run(const TrainConfig& cfg, const Dataset& ds, const EpochCallback& on_epoch) {
  TrainedModel model = init_training(ds, cfg);
  run_from(model, cfg, ds, on_epoch);
  return model;
}

}  // namespace grouprec
