"""Cluster-stratified hardness sampling for speech enhancement evaluation."""

from ._aura import (
    ClipCollection,
    ClusterModel,
    InvalidInput,
    SampleManifest,
    allocate_quotas,
    average_ranks,
    balanced_workload_spec,
    bootstrap_srcc,
    chi_square_sf,
    chi_square_uniformity,
    davies_bouldin,
    default_workload_spec,
    desk_k_grid,
    draw_sample,
    generate_workload,
    hardness_weights,
    kmeanspp_init,
    lloyd,
    load_collection,
    mean_dmos,
    ood_fraction,
    rank_models,
    read_cluster_model,
    read_manifest,
    run_experiment,
    select_k,
    srcc,
    variance_weights,
    weighted_sample,
    write_cluster_model,
    write_collection,
    write_manifest,
)

__all__ = [name for name in dir() if not name.startswith("_")]
