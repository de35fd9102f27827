#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "moire/corners.hpp"
#include "moire/frame.hpp"
#include "moire/homography.hpp"
#include "moire/image.hpp"

namespace moire::align {

/// PSNR threshold below which a registered pair is rejected.
inline constexpr double kDefaultEta = 12.0;

struct IntensityCorrection {
    Image adjusted;
    std::vector<double> shift;     // per channel, mean(reference) - mean(source)
    std::vector<double> residual;  // per channel mean(adjusted) - mean(reference) after clamping
};

/// Shifts each channel of `source` so its mean matches `reference`, then clamps to [0, 1].
IntensityCorrection correct_intensity(const Image& source, const Image& reference);

struct Verification {
    bool accepted = false;
    double psnr = 0.0;
};

/// Accepts iff PSNR(aligned_source, reference) >= eta.
Verification verify_pair(const Image& aligned_source, const Image& reference, double eta = kDefaultEta);

struct RegistrationOptions {
    std::optional<double> threshold;  // binarization threshold; Otsu when empty
    HarrisOptions harris;
    CleanOptions clean;
    bool refine_on_image = true;  // re-localise the cleaned corners on the grey-level image
    double eta = kDefaultEta;
    /// Crop both outputs to the region inside the frame, inset by this many reference pixels
    /// from the outer frame corners. Empty keeps the full reference canvas.
    std::optional<std::size_t> crop_border;
};

struct Registration {
    Homography reference_to_photo;
    CornerSet photo_corners;
    CornerSet reference_corners;
    double reprojection_error = 0.0;  // mean residual of the fit over the 20 correspondences
    Image aligned;                    // photo resampled into the reference frame
    Image reference;                  // reference, cropped like `aligned`
    Verification verification;
};

/// Detects and cleans the 20 frame corners of both images.
CornerSet find_frame_corners(const Image& image, const RegistrationOptions& opt = {});

/// Registers a captured photo against its framed reference. When `reference_corners` is
/// given (e.g. the analytic corners from synthesize_frame) detection on the reference is skipped.
/// Throws CornerDetectionError / CornerCleaningError / NumericalError when registration fails.
Registration register_pair(const Image& photo, const Image& reference,
                           const RegistrationOptions& opt = {},
                           const std::optional<CornerSet>& reference_corners = std::nullopt);

struct IngestRow {
    std::string pair_id;
    std::size_t corner_count = 0;
    double reprojection_error = 0.0;
    double psnr = 0.0;
    bool accepted = false;
    std::string note;
};

/// Registers every (photo, reference) pair of a manifest, writing `<id>_photo.png`,
/// `<id>_reference.png`, `pairs.tsv` (accepted pairs, pair-manifest format) and `report.tsv`
/// into `out_dir`. Failed pairs are reported and skipped.
std::vector<IngestRow> ingest_manifest(const std::filesystem::path& manifest,
                                       const std::filesystem::path& out_dir,
                                       const RegistrationOptions& opt = {});

}  // namespace moire::align
