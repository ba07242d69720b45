#pragma once

// Umbrella header: contour extraction, Kendall pre-shapes, the full
// Procrustes kernel, SVM training, evaluation (LOOCV / ROC / DeLong),
// synthetic data, and file formats.

#include "kshape/contour.hpp"
#include "kshape/delong.hpp"
#include "kshape/errors.hpp"
#include "kshape/io.hpp"
#include "kshape/landmarks.hpp"
#include "kshape/loocv.hpp"
#include "kshape/matrix.hpp"
#include "kshape/pipeline.hpp"
#include "kshape/preshape.hpp"
#include "kshape/rng.hpp"
#include "kshape/roc.hpp"
#include "kshape/svm.hpp"
#include "kshape/synthetic.hpp"
