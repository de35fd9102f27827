#include "moire/tensor.hpp"

#include <cmath>

#include "moire/errors.hpp"

namespace moire::nn {

std::string to_string(const Dims& d) {
    return "(" + std::to_string(d.n) + ", " + std::to_string(d.c) + ", " + std::to_string(d.h) +
           ", " + std::to_string(d.w) + ")";
}

void require_same_dims(const Dims& a, const Dims& b, const std::string& what) {
    if (a == b) return;
    const char* axis = a.n != b.n ? "batch" : a.c != b.c ? "channel" : a.h != b.h ? "height" : "width";
    throw ShapeError(what + ": " + axis + " axis mismatch, " + to_string(a) + " vs " + to_string(b));
}

template <typename T>
bool Tensor4<T>::all_finite() const noexcept {
    for (T v : data_)
        if (!std::isfinite(v)) return false;
    for (T v : grad_)
        if (!std::isfinite(v)) return false;
    return true;
}

template class Tensor4<float>;
template class Tensor4<double>;

}  // namespace moire::nn
