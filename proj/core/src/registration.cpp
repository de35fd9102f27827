#include "moire/registration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>

#include "moire/dataset.hpp"
#include "moire/image_io.hpp"
#include "moire/metrics.hpp"

namespace moire::align {

IntensityCorrection correct_intensity(const Image& source, const Image& reference) {
    require_same_shape(source, reference, "correct_intensity");
    IntensityCorrection r;
    const auto ms = channel_means(source);
    const auto mr = channel_means(reference);
    r.adjusted = source;
    for (std::size_t c = 0; c < source.channels(); ++c) {
        const double shift = mr[c] - ms[c];
        r.shift.push_back(shift);
        for (double& v : r.adjusted.plane(c)) v = std::clamp(v + shift, 0.0, 1.0);
    }
    const auto ma = channel_means(r.adjusted);
    for (std::size_t c = 0; c < source.channels(); ++c) r.residual.push_back(ma[c] - mr[c]);
    return r;
}

Verification verify_pair(const Image& aligned_source, const Image& reference, double eta) {
    Verification v;
    v.psnr = metrics::psnr(aligned_source, reference);
    v.accepted = v.psnr >= eta;
    return v;
}

CornerSet find_frame_corners(const Image& image, const RegistrationOptions& opt) {
    const BinaryImage binary = opt.threshold ? binarize(image, *opt.threshold) : binarize(image);
    const auto candidates = detect_corners(binary, opt.harris);
    const CornerSet cleaned = clean_corners(candidates, binary, opt.clean);
    return opt.refine_on_image ? refine_corners(cleaned, image) : cleaned;
}

Registration register_pair(const Image& photo, const Image& reference, const RegistrationOptions& opt,
                           const std::optional<CornerSet>& reference_corners) {
    Registration r;
    r.photo_corners = find_frame_corners(photo, opt);
    r.reference_corners = reference_corners ? *reference_corners : find_frame_corners(reference, opt);
    r.reference_to_photo = estimate_homography(r.reference_corners.span(), r.photo_corners.span());
    r.reprojection_error =
        mean_reprojection_error(r.reference_to_photo, r.reference_corners.span(), r.photo_corners.span());
    r.aligned = warp(photo, r.reference_to_photo.inverse(), reference.width(), reference.height());
    r.reference = reference;

    if (opt.crop_border) {
        double l = 1e300, t = 1e300, rt = -1e300, b = -1e300;
        for (const Point2& p : r.reference_corners.frame_corners()) {
            l = std::min(l, p.x);
            t = std::min(t, p.y);
            rt = std::max(rt, p.x);
            b = std::max(b, p.y);
        }
        const auto inset = static_cast<long>(*opt.crop_border);
        const long x0 = std::lround(l + 0.5) + inset, y0 = std::lround(t + 0.5) + inset;
        const long x1 = std::lround(rt + 0.5) - inset, y1 = std::lround(b + 0.5) - inset;
        if (x0 < 0 || y0 < 0 || x1 <= x0 || y1 <= y0 || x1 > static_cast<long>(reference.width()) ||
            y1 > static_cast<long>(reference.height()))
            throw ShapeError("register_pair: crop border leaves no interior");
        const auto cx = static_cast<std::size_t>(x0), cy = static_cast<std::size_t>(y0);
        const auto cw = static_cast<std::size_t>(x1 - x0), ch = static_cast<std::size_t>(y1 - y0);
        r.aligned = crop(r.aligned, cx, cy, cw, ch);
        r.reference = crop(r.reference, cx, cy, cw, ch);
    }
    r.verification = verify_pair(r.aligned, convert_channels(r.reference, r.aligned.channels()), opt.eta);
    return r;
}

std::vector<IngestRow> ingest_manifest(const std::filesystem::path& manifest,
                                       const std::filesystem::path& out_dir,
                                       const RegistrationOptions& opt) {
    const auto entries = read_pair_manifest(manifest);
    std::filesystem::create_directories(out_dir);
    std::vector<IngestRow> rows;
    std::vector<PairEntry> accepted;
    std::set<std::string> used;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        IngestRow row;
        row.pair_id = entries[i].contaminated.stem().string();
        if (!used.insert(row.pair_id).second) row.pair_id += "_" + std::to_string(i);
        try {
            const Image photo = io::read_image(entries[i].contaminated);
            const Image reference = io::read_image(entries[i].reference);
            const Registration reg = register_pair(photo, reference, opt);
            row.corner_count = kFrameCorners;
            row.reprojection_error = reg.reprojection_error;
            row.psnr = reg.verification.psnr;
            row.accepted = reg.verification.accepted;
            if (row.accepted) {
                const auto photo_out = out_dir / (row.pair_id + "_photo.png");
                const auto ref_out = out_dir / (row.pair_id + "_reference.png");
                io::write_image(reg.aligned, photo_out);
                io::write_image(reg.reference, ref_out);
                accepted.push_back({photo_out.filename(), ref_out.filename()});
            } else {
                row.note = "psnr below eta";
            }
        } catch (const CornerCleaningError& e) {
            row.corner_count = e.survivors().size();
            row.note = e.what();
        } catch (const std::exception& e) {
            row.note = e.what();
        }
        rows.push_back(row);
    }
    write_pair_manifest(out_dir / "pairs.tsv", accepted);

    std::ofstream report(out_dir / "report.tsv");
    report << "pair_id\tcorners\treprojection_error\tpsnr\tdecision\tnote\n";
    report << std::fixed << std::setprecision(4);
    for (const auto& r : rows)
        report << r.pair_id << '\t' << r.corner_count << '\t' << r.reprojection_error << '\t' << r.psnr
               << '\t' << (r.accepted ? "accept" : "reject") << '\t' << r.note << '\n';
    return rows;
}

}  // namespace moire::align
