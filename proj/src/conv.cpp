#include "nublur/conv.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "nublur/simd/kernels.hpp"

namespace nublur::conv {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FftPlan::FftPlan(int width, int height) : width_(width), height_(height) {
    std::vector<double> real(real_size());
    Spectrum spec(spectrum_size());
    // FFTW_ESTIMATE keeps plan selection deterministic; FFTW_UNALIGNED lets us
    // execute on arbitrary std::vector storage.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_plan_ = fftw_plan_dft_r2c_2d(height, width, real.data(), as_fftw(spec.data()), flags);
    inverse_plan_ = fftw_plan_dft_c2r_2d(height, width, as_fftw(spec.data()), real.data(), flags);
    if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("fftw planning failed");
}

FftPlan::~FftPlan() {
    std::lock_guard lock(planner_mutex());
    if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

std::shared_ptr<const FftPlan> FftPlan::get(int width, int height) {
    if (width < 1 || height < 1) throw std::invalid_argument("fft grid must be non-empty");
    // Lock first so the mutex outlives the cache during static destruction.
    std::lock_guard lock(planner_mutex());
    static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
    auto& slot = cache[{width, height}];
    if (!slot) slot.reset(new FftPlan(width, height));
    return slot;
}

void FftPlan::forward(std::span<const double> in, Spectrum& out) const {
    if (in.size() != real_size()) throw std::invalid_argument("fft input size mismatch");
    out.resize(spectrum_size());
    // r2c preserves its input; the cast only satisfies the C signature.
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()), as_fftw(out.data()));
}

void FftPlan::inverse(const Spectrum& in, std::span<double> out) const {
    if (in.size() != spectrum_size() || out.size() != real_size()) {
        throw std::invalid_argument("inverse fft size mismatch");
    }
    Spectrum scratch(in);  // c2r destroys its input
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), as_fftw(scratch.data()), out.data());
    const double scale = 1.0 / static_cast<double>(real_size());
    for (double& v : out) v *= scale;
}

void check_fits(KernelView kernel, int width, int height) {
    if (kernel.side < 1 || kernel.side % 2 == 0) throw std::invalid_argument("kernel side must be odd");
    if (kernel.data.size() != static_cast<std::size_t>(kernel.side) * kernel.side) {
        throw std::invalid_argument("kernel data length does not match its side");
    }
    if (kernel.side > std::min(width, height)) {
        throw std::invalid_argument("kernel of side " + std::to_string(kernel.side) + " larger than " +
                                    std::to_string(width) + "x" + std::to_string(height) + " plane");
    }
}

Spectrum kernel_spectrum(KernelView kernel, int width, int height) {
    check_fits(kernel, width, height);
    const int radius = kernel.side / 2;
    std::vector<double> embedded(static_cast<std::size_t>(width) * height, 0.0);
    for (int r = 0; r < kernel.side; ++r) {
        const int row = ((r - radius) % height + height) % height;
        for (int c = 0; c < kernel.side; ++c) {
            const int col = ((c - radius) % width + width) % width;
            embedded[static_cast<std::size_t>(row) * width + col] += kernel.data[r * kernel.side + c];
        }
    }
    Spectrum spec;
    FftPlan::get(width, height)->forward(embedded, spec);
    return spec;
}

namespace {

std::vector<double> filter(PlaneView plane, KernelView kernel, bool adjoint) {
    if (plane.data.size() != static_cast<std::size_t>(plane.width) * plane.height) {
        throw std::invalid_argument("plane data length does not match its dimensions");
    }
    const Spectrum k = kernel_spectrum(kernel, plane.width, plane.height);
    const auto plan = FftPlan::get(plane.width, plane.height);
    Spectrum x;
    plan->forward(plane.data, x);
    Spectrum y(x.size());
    const auto& simd = simd::active();
    if (adjoint) {
        simd.cmul_conj_acc(reinterpret_cast<const double*>(x.data()), reinterpret_cast<const double*>(k.data()),
                           reinterpret_cast<double*>(y.data()), x.size());
    } else {
        simd.cmul(reinterpret_cast<const double*>(x.data()), reinterpret_cast<const double*>(k.data()),
                  reinterpret_cast<double*>(y.data()), x.size());
    }
    std::vector<double> out(plan->real_size());
    plan->inverse(y, out);
    return out;
}

}  // namespace

std::vector<double> convolve_circular(PlaneView plane, KernelView kernel) { return filter(plane, kernel, false); }

std::vector<double> correlate_circular(PlaneView plane, KernelView kernel) { return filter(plane, kernel, true); }

std::vector<double> pad_edge_plane(std::span<const double> plane, int width, int height, int margin) {
    if (margin < 0) throw std::invalid_argument("pad margin must be >= 0");
    const int pw = width + 2 * margin;
    const int ph = height + 2 * margin;
    std::vector<double> out(static_cast<std::size_t>(pw) * ph);
    for (int r = 0; r < ph; ++r) {
        const int sr = std::clamp(r - margin, 0, height - 1);
        for (int c = 0; c < pw; ++c) {
            const int sc = std::clamp(c - margin, 0, width - 1);
            out[static_cast<std::size_t>(r) * pw + c] = plane[static_cast<std::size_t>(sr) * width + sc];
        }
    }
    return out;
}

Image pad_edge(const Image& image, int margin) {
    if (margin < 0) throw std::invalid_argument("pad margin must be >= 0");
    if (margin == 0) return image;
    Image out(image.width() + 2 * margin, image.height() + 2 * margin, image.channels());
    for (int c = 0; c < image.channels(); ++c) {
        const auto padded = pad_edge_plane(image.plane(c), image.width(), image.height(), margin);
        std::copy(padded.begin(), padded.end(), out.plane(c).begin());
    }
    return out;
}

Image crop(const Image& image, int margin) {
    if (margin < 0) throw std::invalid_argument("crop margin must be >= 0");
    if (2 * margin >= image.width() || 2 * margin >= image.height()) {
        throw std::invalid_argument("crop margin " + std::to_string(margin) + " exceeds image size " +
                                    std::to_string(image.width()) + "x" + std::to_string(image.height()));
    }
    if (margin == 0) return image;
    Image out(image.width() - 2 * margin, image.height() - 2 * margin, image.channels());
    for (int c = 0; c < image.channels(); ++c) {
        for (int r = 0; r < out.height(); ++r) {
            for (int col = 0; col < out.width(); ++col) {
                out.at(c, r, col) = image.at(c, r + margin, col + margin);
            }
        }
    }
    return out;
}

}  // namespace nublur::conv
