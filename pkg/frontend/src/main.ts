/**
 * Bootstrap: the only configuration is the service base URL and the
 * reviewer token. Both come from the query string (?token=...&api=...)
 * and are remembered in localStorage; the API base defaults to the
 * serving origin since the review service hosts these assets itself.
 */

import { ReviewApiClient } from './api.js'
import { ReviewApp } from './app.js'
import { DraftStore } from './drafts.js'

function config(): { baseUrl: string; token: string | null } {
  const params = new URLSearchParams(window.location.search)
  const token = params.get('token') ?? window.localStorage.getItem('review-token')
  if (params.get('token')) window.localStorage.setItem('review-token', params.get('token')!)
  const baseUrl = params.get('api') ?? window.location.origin
  return { baseUrl, token }
}

function main(): void {
  const root = document.getElementById('app')
  if (!root) return
  const { baseUrl, token } = config()
  if (!token) {
    const note = document.createElement('p')
    note.className = 'error-view'
    note.textContent =
      'Missing reviewer token: open this page with ?token=<your-token> to begin.'
    root.appendChild(note)
    return
  }
  const app = new ReviewApp(root, new ReviewApiClient(baseUrl, token), new DraftStore(token))
  void app.start()
}

main()
