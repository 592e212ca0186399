// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "inkdet/geometry.hpp"
#include "inkdet/image.hpp"

namespace inkdet {

enum class ImageSource { natural, drawing, synthetic };

const char* source_name(ImageSource s);
ImageSource source_from_name(const std::string& name);

/// An image plus its face/body boxes. Boxes stay inside the raster; either
/// list may be empty.
struct AnnotatedImage {
    Image image;
    std::vector<Box> face_boxes;
    std::vector<Box> body_boxes;
    ImageSource source = ImageSource::synthetic;
    std::string id;
    // Ingestion metadata parallel to body_boxes (empty = all person). Drives
    // the animal category on save; geometric ops that drop boxes clear it.
    std::vector<std::uint8_t> body_animal_flags;
};

using Dataset = std::vector<AnnotatedImage>;

struct Category {
    int id = 0;
    std::string name;
};

// ---------------------------------------------------------------------------
// Annotation ingestion (images/annotations/categories JSON, boxes [x,y,w,h])
// ---------------------------------------------------------------------------

/// Loads a detection annotation file. Boxes are converted to center form and
/// clipped to the raster. Categories named "face" feed face_boxes; ids in
/// body_categories feed body_boxes. Missing or unreadable images are skipped
/// with a warning on stderr; a malformed file throws DataError.
Dataset load_coco_annotations(const std::string& annotation_file, const std::string& image_root,
                              const std::set<int>& body_categories);

/// Categories present in an annotation file, in file order.
std::vector<Category> load_categories(const std::string& annotation_file);

/// person plus (optionally) the animal categories, by name. Mirrors the
/// "animals count as bodies" preprocessing rule and its exclusion variant.
std::set<int> animals_as_bodies(const std::vector<Category>& categories,
                                bool include_animals = true);

/// Writes dir/images/<id>.ppm and dir/annotations.json in the ingestion
/// schema, so synthetic corpora ride the same path as real data.
void save_coco_dataset(const Dataset& dataset, const std::string& dir);

// ---------------------------------------------------------------------------
// Stage-1 preprocessing
// ---------------------------------------------------------------------------

/// Drops any image containing a face whose longer side is smaller than
/// ratio * min(H, W) (strict less; boundary faces stay). Idempotent.
Dataset filter_small_faces(const Dataset& dataset, double ratio = 0.02);

// ---------------------------------------------------------------------------
// Style bank
// ---------------------------------------------------------------------------

/// One style slot. apply must be deterministic given (image, id, seed) and
/// preserve the raster dimensions.
struct StyleTransform {
    std::string name;
    std::function<Image(const Image&, const std::string& id, std::uint64_t seed)> apply;
};

enum class StyleMode { single, all, top_k, none };

struct StyleBank {
    std::vector<StyleTransform> transforms;
    StyleMode mode = StyleMode::none;
    int top_k = 5;
};

/// The eleven procedural cartoonization slots, ranked so the first five are
/// the strongest (top_k mode draws from that prefix).
StyleBank make_procedural_bank(StyleMode mode, int top_k = 5);

/// Bank with a single named procedural slot.
StyleBank make_single_style_bank(const std::string& slot_name);

/// Looks up <dir>/<image id>.ppm as the pre-stylized version; falls back to
/// the input when no file exists. Lets real GAN outputs plug into the mixer.
StyleTransform make_precomputed_style(const std::string& name, const std::string& dir);

/// Random per-image style pick: modes all/top_k choose uniformly from the
/// bank (seeded), single applies the sole transform, none is the identity.
Image apply_style(const Image& img, const StyleBank& bank, std::uint64_t seed);
Image apply_style_for_id(const Image& img, const std::string& id, const StyleBank& bank,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

struct AugmentationPolicy {
    bool enabled = true;
    double hflip_prob = 0.5;
    double vflip_prob = 0.5;
    double color_shift_deg = 20.0; // hue rotation bound, degrees
    double shear_deg = 10.0;
    double mosaic_prob = 0.5;
    double gaussian_noise_sigma = 0.03;
    double crop_scale_min = 0.6; // area fraction
    double crop_scale_max = 1.0;

    static AugmentationPolicy disabled();
};

/// No augmentation in the first and last `window` epochs (paper protocol:
/// 15 of 350), the configured policy otherwise.
AugmentationPolicy schedule_augmentation(int epoch, int total_epochs,
                                         const AugmentationPolicy& policy, int window = 15);

/// Teacher-side augmentation: horizontal flip with probability 0.5, labels
/// mirrored.
AnnotatedImage augment_weak(const AnnotatedImage& a, std::uint64_t seed);

/// Student-side augmentation: the weak flip (same first draw for the same
/// seed) followed by Gaussian noise, hue shift, and a random resized crop.
/// Labels ride every geometric op; boxes under 25% visible area are dropped.
/// A crop that keeps no label is retried up to 5 times, then skipped.
/// The default policy carries the recorded strong-augmentation magnitudes.
AnnotatedImage augment_strong(const AnnotatedImage& a, std::uint64_t seed,
                              const AugmentationPolicy& policy = {});

/// The noise/color/crop tail of augment_strong, for callers that already
/// applied the weak flip. augment_strong(a, s, p) ==
/// augment_strong_tail(augment_weak(a, s), derive_seed(s, 0x5774), p).
AnnotatedImage augment_strong_tail(const AnnotatedImage& a, std::uint64_t seed,
                                   const AugmentationPolicy& policy = {});

/// Stage-1 single-image chain: flips, hue shift, shear (mosaic happens at the
/// batch level).
AnnotatedImage apply_stage1_augmentation(const AnnotatedImage& a, const AugmentationPolicy& policy,
                                         std::uint64_t seed);

/// Individual geometric ops, exposed for label-transport checks.
AnnotatedImage hflip(const AnnotatedImage& a);
AnnotatedImage vflip(const AnnotatedImage& a);
AnnotatedImage shear_horizontal(const AnnotatedImage& a, double degrees);
AnnotatedImage crop_resize(const AnnotatedImage& a, int x0, int y0, int side);
Image hue_rotate(const Image& img, double degrees);
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

/// 2x2 mosaic around a jittered center split (jitter inside the middle 50%
/// of each axis). Each source contributes a center-aligned window matching
/// its quadrant; boxes are translated, clipped, and dropped below 25%
/// visibility. Throws unless given exactly 4 images.
AnnotatedImage mosaic(const std::vector<AnnotatedImage>& imgs, int out_size, std::uint64_t seed);

/// Deterministic mosaic core with an explicit split point.
AnnotatedImage mosaic_at(const std::vector<AnnotatedImage>& imgs, int out_size, int cx, int cy);

// ---------------------------------------------------------------------------
// Sampling and the synthetic corpus
// ---------------------------------------------------------------------------

/// Uniform sample of n images without replacement (deterministic per seed);
/// nullopt means the whole dataset. n > |dataset| throws.
Dataset subset_sampler(const Dataset& dataset, std::optional<std::size_t> n, std::uint64_t seed);

struct CorpusSpec {
    int image_size = 64;
    int natural_train = 96;
    int drawing_unlabeled = 64;
    int drawing_labeled_train = 96;
    int drawing_dev = 24;
    int drawing_test = 32;
    double animal_prob = 0.25;
    double tiny_face_prob = 0.06;
};

struct SyntheticCorpus {
    Dataset natural_train;
    Dataset drawing_unlabeled; // emitted without annotations
    Dataset drawing_labeled_train;
    Dataset drawing_dev;
    Dataset drawing_test;
};

/// A character in a generated scene; boxes derive from these analytically.
struct CharacterSpec {
    double body_cx, body_cy, body_w, body_h; // capsule
    double face_cx, face_cy, face_w, face_h; // ellipse
    bool animal = false;
    bool tiny_face = false;
};

struct SceneGraph {
    std::vector<CharacterSpec> characters;
    int drawing_substyle = 0;
};

/// Renders one scene. Natural style: textured background, shaded shapes.
/// Drawing style: flat fills and outlines across 4 procedural sub-styles.
AnnotatedImage render_scene(const SceneGraph& scene, int image_size, bool drawing_style,
                            std::uint64_t seed, const std::string& id);

SceneGraph sample_scene(int image_size, double animal_prob, double tiny_face_prob,
                        std::uint64_t seed);

/// Deterministic desk-scale stand-in for the natural/drawing corpora, with
/// disjoint id spaces across splits.
SyntheticCorpus generate_synthetic_corpus(const CorpusSpec& spec, std::uint64_t seed);

void save_corpus(const SyntheticCorpus& corpus, const std::string& dir);

} // namespace inkdet
