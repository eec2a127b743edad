#pragma once

#include "corrbridge/data/batch.hpp"
#include "corrbridge/seqmodel/modules.hpp"

namespace corrbridge {

/// Mean over the batch of the per-example teacher-forced sequence NLL.
/// Every target row must hold BOS and at least one scored token.
template <typename T>
Tensor<T> batch_cross_entropy(const Decoder<T>& decoder, const Tensor<T>& reps, const SequenceBatch& targets);

}  // namespace corrbridge
