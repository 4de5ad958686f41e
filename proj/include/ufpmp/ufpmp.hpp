#pragma once

#include "ufpmp/boiw.hpp"
#include "ufpmp/config.hpp"
#include "ufpmp/error.hpp"
#include "ufpmp/frg.hpp"
#include "ufpmp/geometry.hpp"
#include "ufpmp/io/atomic_file.hpp"
#include "ufpmp/io/detections.hpp"
#include "ufpmp/io/layout.hpp"
#include "ufpmp/io/ppm.hpp"
#include "ufpmp/io/report.hpp"
#include "ufpmp/io/scene_spec.hpp"
#include "ufpmp/io/stats_report.hpp"
#include "ufpmp/io/vocab.hpp"
#include "ufpmp/metrics.hpp"
#include "ufpmp/mosaic.hpp"
#include "ufpmp/mproxy.hpp"
#include "ufpmp/otcore.hpp"
#include "ufpmp/pipeline.hpp"
#include "ufpmp/remap.hpp"
#include "ufpmp/scene.hpp"
#include "ufpmp/train_sim.hpp"
