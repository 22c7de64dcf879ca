// Stores random memories, trains a feature map and compares retrieval of a
// noisy query before and after training.

#include <cstdio>

#include "uhop/uhop.hpp"

int main() {
  using namespace uhop;
  const PatternSet xi = generate_synthetic(10, 5, 3);
  HopfieldConfig cfg;
  cfg.beta = 4.0;

  Rng noise(11);
  Vector query = xi.column(0);
  for (Index i = 0; i < query.size(); ++i) query(i) += 0.3 * noise.gaussian();

  const RetrievalTrace plain = retrieve(query, xi, nullptr, cfg);
  std::printf("MHM: %d steps, error %.4f, support %d\n", plain.steps, retrieval_error(plain.iterates.back(), xi, 0),
              metastable_size(plain.weights_final, cfg.norm));

  TrainConfig tcfg;
  const auto [phi, log] = uhop_plus(xi, initial_weights(5, 5, 1), tcfg);
  std::printf("separation loss %.4f -> %.4f\n", log.initial_loss, log.loss_per_iter.back());

  const RetrievalTrace kernel = retrieve(query, xi, &phi, cfg);
  std::printf("KHM: %d steps, error %.4f, support %d\n", kernel.steps,
              retrieval_error(kernel.iterates.back(), xi, 0), metastable_size(kernel.weights_final, cfg.norm));
  return 0;
}
