from sklearn.manifold import spectral_embedding
from sklearn.metrics.pairwise import pairwise_kernels
from sklearn.neighbors import NearestNeighbors, kneighbors_graph


class SpectralClustering:
    """Apply clustering to a projection of the normalized Laplacian.

    Parameters
    ----------
    n_clusters : int, default=8
        The dimension of the projection subspace.
    gamma : float, default=1.0
        Kernel coefficient for rbf, poly, sigmoid, laplacian and chi2 kernels.
        Ignored for affinity='nearest_neighbors'.
    affinity : str or callable, default='rbf'
        How to construct the affinity matrix.
        'nearest_neighbors' constructs the affinity matrix by computing a
        graph of nearest neighbors; 'precomputed' interprets X as a
        precomputed affinity matrix.
    n_neighbors : int, default=10
        Number of neighbors to use when constructing the affinity matrix using
        the nearest neighbors method. Ignored for affinity='rbf'.
    degree : float, default=3
        Degree of the polynomial kernel. Ignored by other kernels.
    coef0 : float, default=1
        Zero coefficient for polynomial and sigmoid kernels.
    kernel_params : dict of str to any, default=None
        Parameters (keyword arguments) and values for kernel passed as
        callable object. Ignored by other kernels.
    """

    def fit(self, X, y=None):
        if self.affinity == "nearest_neighbors":
            connectivity = kneighbors_graph(X, n_neighbors=self.n_neighbors, include_self=True)
            self.affinity_matrix_ = 0.5 * (connectivity + connectivity.T)
        elif self.affinity == "precomputed_nearest_neighbors":
            estimator = NearestNeighbors(n_neighbors=self.n_neighbors, metric="precomputed")
            connectivity = estimator.kneighbors_graph(X)
            self.affinity_matrix_ = 0.5 * (connectivity + connectivity.T)
        elif self.affinity == "precomputed":
            self.affinity_matrix_ = X
        else:
            params = self.kernel_params
            if params is None:
                params = {}
            if not callable(self.affinity):
                params["gamma"] = self.gamma
                params["degree"] = self.degree
                params["coef0"] = self.coef0
            self.affinity_matrix_ = pairwise_kernels(
                X, metric=self.affinity, filter_params=True, **params
            )
        self.labels_ = spectral_embedding(self.affinity_matrix_, n_components=self.n_clusters)
        return self
