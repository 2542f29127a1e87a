#pragma once

#include "lesionkit/config.hpp"
#include "lesionkit/discretize.hpp"
#include "lesionkit/learn/cv.hpp"
#include "lesionkit/learn/forest.hpp"
#include "lesionkit/learn/join.hpp"
#include "lesionkit/learn/labels.hpp"
#include "lesionkit/learn/search.hpp"
#include "lesionkit/learn/ttest.hpp"
#include "lesionkit/maskio/feature_table.hpp"
#include "lesionkit/maskio/manifest.hpp"
#include "lesionkit/maskio/nrrd.hpp"
#include "lesionkit/radiomics/catalog.hpp"
#include "lesionkit/radiomics/extract.hpp"
#include "lesionkit/resample.hpp"
#include "lesionkit/segeval.hpp"
#include "lesionkit/segpost.hpp"
#include "lesionkit/synth.hpp"
#include "lesionkit/volgrid.hpp"
