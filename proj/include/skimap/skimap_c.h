/* C interface to the skimap library. Every call returns a skimap_status;
 * on failure skimap_last_error() describes the problem for the calling
 * thread until its next call. Handles are opaque and owned by the caller. */
#ifndef SKIMAP_C_H
#define SKIMAP_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(SKIMAP_BUILDING_LIBRARY)
#define SKIMAP_API __attribute__((visibility("default")))
#else
#define SKIMAP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum skimap_status {
  SKIMAP_OK = 0,
  SKIMAP_ERR_ARGUMENT = 1,   /* bad parameter or config value */
  SKIMAP_ERR_BOUNDS = 2,     /* coordinate outside the 16-bit key range */
  SKIMAP_ERR_EROSION = 3,    /* erosion of a sample that was never fused */
  SKIMAP_ERR_PARSE = 4,      /* malformed frame log or dump */
  SKIMAP_ERR_IO = 5,         /* file could not be opened or written */
  SKIMAP_ERR_GROUND = 6,     /* no ground plane found */
  SKIMAP_ERR_INVARIANT = 7,  /* internal consistency check failed */
  SKIMAP_ERR_INTERNAL = 8
} skimap_status;

typedef struct skimap_map skimap_map;
typedef struct skimap_voxel_list skimap_voxel_list;

typedef struct skimap_config {
  double resolution;
  int depth;                  /* skiplist levels on every axis */
  size_t workers;
  uint64_t seed;
  uint32_t navigable_hits;
  int skip_out_of_bounds;     /* 0: reject the whole batch, 1: skip and count */
} skimap_config;

typedef struct skimap_stats {
  size_t voxels;
  size_t tiles;
  size_t x_nodes;
  size_t y_nodes;
  size_t bytes;               /* measured from the node layouts */
} skimap_stats;

typedef struct skimap_voxel {
  int16_t ix, iy, iz;
  double probability;
  double weight;
} skimap_voxel;

SKIMAP_API const char* skimap_version(void);
SKIMAP_API const char* skimap_last_error(void);
SKIMAP_API const char* skimap_status_name(skimap_status status);

SKIMAP_API void skimap_config_default(skimap_config* config);

SKIMAP_API skimap_status skimap_create(const skimap_config* config, skimap_map** out);
SKIMAP_API void skimap_destroy(skimap_map* map);

/* xyz holds 3 * count doubles. workers == 0 uses the map's worker count. */
SKIMAP_API skimap_status skimap_integrate_points(skimap_map* map, const double* xyz, size_t count,
                                                 double probability, double weight, size_t workers);
SKIMAP_API skimap_status skimap_erode_points(skimap_map* map, const double* xyz, size_t count,
                                             double probability, double weight, size_t workers);

SKIMAP_API skimap_status skimap_quantize(const skimap_map* map, double x, double y, double z, int16_t key[3]);

/* *found is 0 on a miss; out is left untouched then. */
SKIMAP_API skimap_status skimap_get_voxel(const skimap_map* map, int16_t ix, int16_t iy, int16_t iz,
                                          skimap_voxel* out, int* found);

SKIMAP_API skimap_status skimap_radius_search(const skimap_map* map, double x, double y, double z,
                                              double radius, skimap_voxel_list** out);
SKIMAP_API skimap_status skimap_box_search(const skimap_map* map, int16_t ix, int16_t iy, int16_t iz,
                                           int64_t hx, int64_t hy, int64_t hz, skimap_voxel_list** out);

SKIMAP_API size_t skimap_voxel_list_size(const skimap_voxel_list* list);
/* Nonzero when the search window was clipped to the key range. */
SKIMAP_API int skimap_voxel_list_clamped(const skimap_voxel_list* list);
SKIMAP_API skimap_status skimap_voxel_list_get(const skimap_voxel_list* list, size_t index, skimap_voxel* out);
SKIMAP_API void skimap_voxel_list_destroy(skimap_voxel_list* list);

SKIMAP_API skimap_status skimap_get_stats(const skimap_map* map, skimap_stats* out);
SKIMAP_API skimap_status skimap_check(const skimap_map* map);

/* tile_path may be NULL. Dumps carry keys only; the resolution comes from
 * the config given to skimap_load. */
SKIMAP_API skimap_status skimap_save(const skimap_map* map, const char* voxel_path, const char* tile_path);
SKIMAP_API skimap_status skimap_load(const skimap_config* config, const char* voxel_path, const char* tile_path,
                                     skimap_map** out);

/* Writes the 2D grid from the column query. oracle_pgm_path may be NULL;
 * when set, the projection of the full voxel listing is written there and
 * *matches tells whether the two grids agree. */
SKIMAP_API skimap_status skimap_export2d(const skimap_map* map, const char* pgm_path, const char* meta_path,
                                         int navigable_only, const char* oracle_pgm_path, int* matches);

/* Replays a frame log. config_json and overrides_json are JSON objects
 * applied in that order over the defaults (either may be NULL). Any output
 * path may be NULL. out may be NULL when the map is not needed. */
SKIMAP_API skimap_status skimap_build_from_log(const char* log_path, const char* config_json,
                                               const char* overrides_json, const char* voxel_path,
                                               const char* tile_path, const char* stats_path,
                                               skimap_map** out);

/* Effective run config after merging, as JSON. Free with skimap_string_free. */
SKIMAP_API skimap_status skimap_run_config(const char* config_json, const char* overrides_json, char** out_json);

SKIMAP_API skimap_status skimap_bench(const char* bench_json, const char* csv_path);
SKIMAP_API skimap_status skimap_generate_scene(const char* scene_json, const char* log_path);

SKIMAP_API void skimap_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
