#pragma once

#include <trstream/batch.hpp>
#include <trstream/errors.hpp>
#include <trstream/fft.hpp>
#include <trstream/linalg.hpp>
#include <trstream/rng.hpp>
#include <trstream/sketch.hpp>
#include <trstream/streaming.hpp>
#include <trstream/tensor.hpp>
#include <trstream/tensor_io.hpp>
#include <trstream/tr_algebra.hpp>

#include <trstream/harness/config.hpp>
#include <trstream/harness/protocol.hpp>
#include <trstream/harness/report.hpp>
#include <trstream/harness/synthetic.hpp>
