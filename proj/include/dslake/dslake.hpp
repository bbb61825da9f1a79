#pragma once

#include "dslake/core/digest.hpp"
#include "dslake/core/error.hpp"
#include "dslake/core/random.hpp"
#include "dslake/core/region.hpp"
#include "dslake/core/text.hpp"
#include "dslake/core/time.hpp"
#include "dslake/core/value.hpp"
#include "dslake/cyclone/bsm.hpp"
#include "dslake/cyclone/detect.hpp"
#include "dslake/cyclone/ensemble.hpp"
#include "dslake/cyclone/geo.hpp"
#include "dslake/cyclone/grid.hpp"
#include "dslake/cyclone/params.hpp"
#include "dslake/cyclone/plugin.hpp"
#include "dslake/cyclone/synthetic.hpp"
#include "dslake/cyclone/track.hpp"
#include "dslake/engine/engine.hpp"
#include "dslake/engine/result_document.hpp"
#include "dslake/exec/binding.hpp"
#include "dslake/exec/hybrid.hpp"
#include "dslake/knowledge/descriptors.hpp"
#include "dslake/knowledge/kd_format.hpp"
#include "dslake/knowledge/procedures.hpp"
#include "dslake/knowledge/registry.hpp"
#include "dslake/query/ast.hpp"
#include "dslake/query/format.hpp"
#include "dslake/query/lexer.hpp"
#include "dslake/query/parser.hpp"
#include "dslake/query/validate.hpp"
#include "dslake/storage/disk.hpp"
#include "dslake/storage/layout.hpp"
