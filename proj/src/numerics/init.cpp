#include "corrbridge/numerics/init.hpp"

namespace corrbridge {

template <typename T>
void uniform_fill(Tensor<T>& t, Rng& rng, double range) {
  std::uniform_real_distribution<double> dist(-range, range);
  for (T& x : t.mutable_data()) x = static_cast<T>(dist(rng));
}

template <typename T>
Tensor<T> make_weight(Shape shape, Rng& rng) {
  auto t = Tensor<T>::zeros(std::move(shape), true);
  uniform_fill(t, rng);
  return t;
}

template <typename T>
Tensor<T> make_bias(std::size_t size) {
  return Tensor<T>::zeros(Shape{size}, true);
}

template void uniform_fill<float>(Tensor<float>&, Rng&, double);
template void uniform_fill<double>(Tensor<double>&, Rng&, double);
template Tensor<float> make_weight<float>(Shape, Rng&);
template Tensor<double> make_weight<double>(Shape, Rng&);
template Tensor<float> make_bias<float>(std::size_t);
template Tensor<double> make_bias<double>(std::size_t);

}  // namespace corrbridge
