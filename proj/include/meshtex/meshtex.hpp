#pragma once

#include "meshtex/atlas.hpp"
#include "meshtex/attnref.hpp"
#include "meshtex/base64.hpp"
#include "meshtex/edges.hpp"
#include "meshtex/export.hpp"
#include "meshtex/generator.hpp"
#include "meshtex/image.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/obj_io.hpp"
#include "meshtex/png_io.hpp"
#include "meshtex/primitives.hpp"
#include "meshtex/remote.hpp"
#include "meshtex/render.hpp"
#include "meshtex/texturing.hpp"
#include "meshtex/wire.hpp"
