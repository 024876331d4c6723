from .bgm import BgmModel, bgm_fit
from .kmeans import KMeansModel, assign, detect_elbow, elbow_sweep, kmeans_fit, nearest_centroid, wcss
from .labels import ClusterLabeling, canonicalize_labels, compact_labels
from .silhouette import silhouette_samples, silhouette_score

__all__ = [
    "BgmModel",
    "ClusterLabeling",
    "KMeansModel",
    "assign",
    "bgm_fit",
    "canonicalize_labels",
    "compact_labels",
    "detect_elbow",
    "elbow_sweep",
    "kmeans_fit",
    "nearest_centroid",
    "silhouette_samples",
    "silhouette_score",
    "wcss",
]
