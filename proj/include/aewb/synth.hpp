#pragma once

#include <cstdint>

#include "aewb/data.hpp"
#include "aewb/image_io.hpp"

namespace aewb {

// Bundled synthetic corpora used by the pipelines when no external data is
// configured. All generators are pure functions of their arguments.

// 21 features on a curved 2-parameter sheet plus small noise; numeric
// target column "activity" (one of the sheet parameters).
Dataset synth_manifold(int instances, uint64_t seed);

// Points on a strict 2-D plane embedded in `dims` dimensions with tiny
// noise; numeric target column "activity".
Dataset synth_plane(int instances, int dims, uint64_t seed);

// Grayscale images of bright rectangles and discs on a dark background.
ImageSet synth_shapes(int count, int size, uint64_t seed);

// Grayscale face-like images: head ellipse, eyes and mouth varying in
// position, size, spacing, and intensity.
ImageSet synth_faces(int count, int size, uint64_t seed);

// Binary bag-of-words corpus with `topics` disjoint preferred-term blocks;
// nominal target column "topic".
Dataset synth_topics(int docs, int terms, int topics, uint64_t seed);

// Network-traffic-like table: 12 numeric features around one Gaussian mode
// plus a nominal "proto" column; test rows contain `anomaly_frac` anomalies
// displaced at least 4 sigma. Split comes preassigned (train rows clean);
// nominal target column "label" in {normal, anomaly}.
Dataset synth_traffic(int train_n, int test_n, double anomaly_frac, uint64_t seed);

}  // namespace aewb
